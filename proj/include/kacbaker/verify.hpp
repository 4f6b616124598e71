#pragma once
// Invariant suite: cross-checks that tie the independent layers of the
// library together. Every check pits two routes to the same quantity against
// each other (lattice sum vs operator trace, series vs closed form, spectrum
// vs spectrum, transform vs conjugated operator) so a defect in any one layer
// breaks at least one row. This is what the `verify` subcommand runs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kacbaker/bargmann.hpp"
#include "kacbaker/kacg.hpp"
#include "kacbaker/model.hpp"
#include "kacbaker/ruelle.hpp"
#include "kacbaker/special.hpp"
#include "kacbaker/spectral.hpp"

namespace kacbaker {

/// One row of the invariant suite. `tol` is the tolerance that was applied;
/// the acceptance rule is abs_err <= tol * max(1, |lhs|, |rhs|), i.e. relative
/// for large values with an absolute floor so residual-against-zero rows work.
struct CheckResult {
  std::string name;
  std::complex<double> lhs;
  std::complex<double> rhs;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

namespace detail {

inline CheckResult make_check(std::string name, std::complex<double> lhs, std::complex<double> rhs,
                              double tol) {
  CheckResult r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.abs_err = std::abs(lhs - rhs);
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  r.rel_err = scale > 0.0 ? r.abs_err / scale : 0.0;
  r.tol = tol;
  r.pass = std::isfinite(r.abs_err) && r.abs_err <= tol * std::max(1.0, scale);
  return r;
}

inline std::string beta_tag(double beta) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", beta);
  return std::string(buf);
}

}  // namespace detail

/// Runs the full cross-check suite at the given coupling decay rate and the
/// listed (real) inverse temperatures. tol_override = 0 keeps each check's
/// built-in tolerance; a positive value replaces all of them, which is how a
/// deliberately unreachable tolerance forces a failing report.
inline VerificationReport run_invariant_suite(const ModelParams& params,
                                              const std::vector<double>& betas,
                                              double tol_override = 0.0) {
  if (betas.empty()) throw std::domain_error("run_invariant_suite: need at least one beta");
  for (double b : betas) require_finite(Beta(b), "run_invariant_suite");
  if (!(tol_override >= 0.0))
    throw std::domain_error("run_invariant_suite: tolerance override must be nonnegative");

  const auto tol = [tol_override](double dflt) {
    return tol_override > 0.0 ? tol_override : dflt;
  };

  VerificationReport report;
  auto add = [&report](CheckResult c) { report.checks.push_back(std::move(c)); };

  // --- checks independent of beta ---------------------------------------

  {  // Mehler sum against its closed Gaussian form and the hyperbolic rewrite.
    // Deviations are absolute: the series has O(1) mass, so that is the level
    // at which double-precision agreement is meaningful.
    double worst = 0.0;
    for (double x : {-1.2, -0.4, 0.3, 1.1}) {
      for (double y : {-1.2, -0.4, 0.3, 1.1}) {
        const int terms = mehler_adaptive_terms(params.lambda, x, y);
        const auto sides = mehler_sides(params.lambda, x, y, terms);
        const double dev = std::max(std::abs(sides.lhs - sides.rhs),
                                    std::abs(sides.rhs_hyperbolic - sides.rhs));
        worst = std::max(worst, dev);
      }
    }
    add(detail::make_check("mehler kernel identity", worst, 0.0, tol(1e-10)));
  }

  {  // Kernel factorization: cosh prefactor times the coupling-free kernel.
    double worst = 0.0;
    for (Beta beta : {Beta(0.7), Beta(0.5, 0.3)}) {
      const std::complex<double> sb = std::sqrt(beta);
      for (double xi : {-1.8, -0.3, 0.9}) {
        for (double eta : {-1.1, 0.5, 1.6}) {
          const std::complex<double> full = kac_kernel(beta, xi, eta, params);
          const std::complex<double> split =
              std::sqrt(std::cosh(sb * xi) * std::cosh(sb * eta) /
                        (pi * std::exp(params.gamma))) *
              ktilde_kernel(xi, eta, params);
          worst = std::max(worst, std::abs(full - split) / std::abs(full));
        }
      }
    }
    add(detail::make_check("kernel factorization", worst, 0.0, tol(1e-12)));
  }

  {  // Fock-space transform sends the degree-6 basis function to its monomial.
    HermiteCoefficients h6;
    h6.coeffs.assign(7, 0.0);
    h6.coeffs[6] = 1.0;
    const LineFunction f = [&h6](double x) { return std::complex<double>(h6(x)); };
    const double mono = std::sqrt(std::pow(pi, 6) / 720.0);
    double worst = 0.0;
    for (std::complex<double> z :
         {std::complex<double>(0.4, 0.0), std::complex<double>(-0.3, 0.6),
          std::complex<double>(1.2, -0.5), std::complex<double>(0.0, 0.7)}) {
      const std::complex<double> want = mono * detail::ipow(z, 6);
      worst = std::max(worst, std::abs(bargmann_transform(f, z) - want) / std::abs(want));
    }
    add(detail::make_check("transform maps basis to monomials", worst, 0.0, tol(1e-8)));
  }

  {  // Zeta at the coupling-free point: two branches of equal weight.
    const auto at_one = zeta_value(1.0, Beta(0.0), 60, params);
    add(detail::make_check("zeta special value at beta = 0", at_one.value, -1.0, tol(1e-7)));
    const auto inside = zeta_value(0.4, Beta(0.0), 60, params);
    add(detail::make_check("zeta counting form at beta = 0", inside.value, 5.0, tol(1e-9)));
  }

  // --- checks repeated per inverse temperature ---------------------------

  for (double b : betas) {
    const Beta beta(b);
    const std::string at = " (beta = " + detail::beta_tag(b) + ")";

    add(detail::make_check("lattice trace equals kernel trace" + at,
                           exact_trace_ruelle_power(1, beta, params),
                           trace_g_closed_form(beta, params), tol(1e-12)));

    {  // Lattice sums against truncated operator traces, both realizations.
      const auto comp = ruelle_matrix(beta, 80, params);
      for (int n = 1; n <= 3; ++n) {
        const auto exact = exact_trace_ruelle_power(n, beta, params);
        add(detail::make_check("composition trace vs lattice sum, n = " + std::to_string(n) + at,
                               truncated_trace_power(comp, n), exact, tol(1e-7)));
      }
      if (b >= 0.0) {
        const auto quad = g_matrix_quadrature(beta, 60, params);
        for (int n = 1; n <= 3; ++n) {
          const auto exact = exact_trace_gutzwiller_power(n, beta, params);
          add(detail::make_check("integral trace vs lattice sum, n = " + std::to_string(n) + at,
                                 truncated_trace_power(quad.matrix, n), exact, tol(1e-7)));
        }
      }

      {  // Spectrum of a real-beta section stays on the real axis.
        const auto spec = eigenvalues(comp);
        double worst = 0.0;
        const double top = std::abs(spec.eigenvalues.front());
        for (const auto& rho : spec.eigenvalues) worst = std::max(worst, std::abs(rho.imag()));
        add(detail::make_check("spectrum stays real" + at, worst / top, 0.0, tol(1e-8)));
      }

      {  // Determinant via LU against the eigenvalue product on one section.
        const auto spec = eigenvalues(comp);
        const std::complex<double> z(0.3, 0.0);
        std::complex<double> prod = 1.0;
        for (const auto& rho : spec.eigenvalues) prod *= (1.0 - z * rho);
        add(detail::make_check("determinant matches eigenvalue product" + at,
                               fredholm_det(beta, z, 80, params), prod, tol(1e-9)));

        // Trace-series form of the determinant inside its convergence disc.
        const double zs = 0.3 / std::abs(spec.eigenvalues.front());
        add(detail::make_check("determinant matches trace series" + at,
                               fredholm_det(beta, zs, 80, params),
                               fredholm_det_series(beta, zs, params), tol(1e-9)));
      }
    }

    {  // Partial diagonal sum of the closed-form section against the trace.
      const auto bm = b_matrix(beta, 80, params);
      std::complex<double> diag = 0.0;
      for (int m = 0; m < 80; ++m) diag += bm.entries(m, m);
      add(detail::make_check("hermite diagonal sum matches closed-form trace" + at, diag,
                             trace_g_closed_form(beta, params), tol(1e-9)));
    }

    {  // Transform conjugations, run at a strictly positive temperature.
      const double bpos = b > 0.0 ? b : 0.7;
      const auto ids = verify_operator_identities({0, 1, 3}, tol(1e-8), params, bpos);
      double worst = 0.0;
      for (const auto& c : ids.checks) worst = std::max(worst, c.max_dev);
      add(detail::make_check(
          "operator identities (beta = " + detail::beta_tag(bpos) + ")", worst, 0.0, tol(1e-8)));
    }

    if (b >= 0.0) {
      const auto match = spectra_match(b, params, 80, 60, tol(1e-6), 5);
      add(detail::make_check("realizations share leading spectrum" + at, match.max_deviation, 0.0,
                             tol(1e-6)));

      const auto conn = eigenfunction_connection_check(b, 0, params, 30);
      add(detail::make_check("transported eigenvector residual" + at, conn.residual, 0.0,
                             tol(1e-5)));
    }
  }

  return report;
}

}  // namespace kacbaker
