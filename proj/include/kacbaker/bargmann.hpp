#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kacbaker/kacg.hpp"
#include "kacbaker/quadrature.hpp"
#include "kacbaker/ruelle.hpp"
#include "kacbaker/special.hpp"

namespace kacbaker {

using LineFunction = std::function<std::complex<double>(double)>;
using PlaneFunction = std::function<std::complex<double>(std::complex<double>)>;

/// F = sum_k c_k zeta_k with zeta_k(z) = sqrt(pi^k/k!) z^k, the orthonormal
/// monomial basis of the Fock space; the squared-coefficient sum is the
/// Fock-space norm^2.
struct FockCoefficients {
  std::vector<std::complex<double>> coeffs;

  std::complex<double> operator()(std::complex<double> z) const {
    std::complex<double> acc(0.0, 0.0);
    std::complex<double> zeta(1.0, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      acc += coeffs[k] * zeta;
      zeta *= z * std::sqrt(pi / static_cast<double>(k + 1));
    }
    return acc;
  }

  double norm_sq() const {
    double s = 0.0;
    for (const auto& c : coeffs) s += std::norm(c);
    return s;
  }
};

/// f = sum_k a_k h_k in the Hermite basis on the line.
struct HermiteCoefficients {
  std::vector<std::complex<double>> coeffs;

  std::complex<double> operator()(double x) const {
    if (coeffs.empty()) return {0.0, 0.0};
    std::vector<double> h(coeffs.size());
    hermite_values(static_cast<int>(coeffs.size()) - 1, x, h.data());
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * h[k];
    return acc;
  }
};

namespace detail {

/// Adaptive Gaussian-window integral of g over the line: node count doubles
/// until two consecutive clean evaluations agree to 1e-14 (relative to
/// max(1,|I|)). An integrand whose outer-window terms dominate signals
/// faster-than-Gaussian growth and raises a domain error at the largest
/// window, since enlarging it can only make such an integral worse.
inline std::complex<double> adaptive_gauss(const std::function<std::complex<double>(double)>& g,
                                           double a) {
  std::complex<double> prev(0.0, 0.0);
  bool have_clean_prev = false;
  std::complex<double> last(0.0, 0.0);
  for (int q = 64; q <= 1024; q *= 2) {
    const auto& rule = gaussian_quadrature(q, a);
    double max_node = 0.0;
    for (double x : rule.nodes) max_node = std::max(max_node, std::abs(x));
    KahanSum<std::complex<double>> acc;
    double total_abs = 0.0;
    double outer_abs = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const std::complex<double> term = rule.weights[i] * g(rule.nodes[i]);
      acc.add(term);
      const double t = std::abs(term);
      total_abs += t;
      if (std::abs(rule.nodes[i]) >= 0.9 * max_node) outer_abs += t;
    }
    last = acc.value();
    // Non-finite totals mean the integrand overflowed inside the window;
    // treat that as escape evidence too.
    if (!std::isfinite(total_abs) || outer_abs > 1e-8 * (total_abs + 1e-300)) {
      if (q == 1024)
        throw std::domain_error("line integral: integrand escapes the quadrature window");
      have_clean_prev = false;
      continue;
    }
    if (have_clean_prev && std::abs(last - prev) <= 1e-14 * std::max(1.0, std::abs(last)))
      return last;
    prev = last;
    have_clean_prev = true;
  }
  return last;
}

}  // namespace detail

/// Integral transform Bf(z) = 2^{1/4} int f(xi) exp(2 pi xi z - pi xi^2 -
/// (pi/2) z^2) dxi, evaluated by quadrature.
inline std::complex<double> bargmann_transform(const LineFunction& f, std::complex<double> z) {
  const std::complex<double> zfac = std::exp(-0.5 * pi * z * z);
  const double norm = std::pow(2.0, 0.25);
  return detail::adaptive_gauss(
      [&](double xi) {
        return norm * f(xi) * std::exp(2.0 * pi * xi * z - pi * xi * xi) * zfac;
      },
      2.0 * pi);
}

/// Coefficient route: the transform maps h_k to zeta_k, so coefficients pass
/// through unchanged.
inline FockCoefficients bargmann_transform(const HermiteCoefficients& f) {
  return FockCoefficients{f.coeffs};
}

/// (M_lambda F)(z) = 2 sqrt(lambda) F(lambda z); diagonal on the monomial
/// basis with eigenvalues 2 lambda^{k+1/2}.
inline std::complex<double> m_lambda_apply(const PlaneFunction& f, std::complex<double> z,
                                           const ModelParams& params) {
  return 2.0 * std::sqrt(params.lambda) * f(params.lambda * z);
}

inline FockCoefficients m_lambda_coeffs(const FockCoefficients& f, const ModelParams& params) {
  FockCoefficients out{f.coeffs};
  for (std::size_t k = 0; k < out.coeffs.size(); ++k)
    out.coeffs[k] *= 2.0 * std::pow(params.lambda, static_cast<double>(k) + 0.5);
  return out;
}

/// (C_s F)(z) = (1/2) e^{s^2/8pi} (e^{sz/2} F(z + s/2pi) + e^{-sz/2} F(z - s/2pi)).
inline std::complex<double> c_s_apply(const PlaneFunction& f, std::complex<double> z, double s) {
  const double shift = s / (2.0 * pi);
  return 0.5 * std::exp(s * s / (8.0 * pi)) *
         (std::exp(0.5 * s * z) * f(z + shift) + std::exp(-0.5 * s * z) * f(z - shift));
}

/// The rescaled composite nu_{1/alpha} . C_s . M_lambda . nu_alpha with
/// s = 2 sqrt(pi beta), alpha = sqrt(pi/beta) (so alpha s = 2 pi), assembled
/// from the building blocks; equals sqrt(lambda e^beta) times the pointwise
/// composition-operator action.
inline std::complex<double> bargmann_composite_apply(const PlaneFunction& f,
                                                     std::complex<double> z, double beta,
                                                     const ModelParams& params) {
  if (!(beta > 0.0)) throw std::domain_error("bargmann_composite_apply: requires beta > 0");
  const double s = 2.0 * std::sqrt(pi * beta);
  const double alpha = std::sqrt(pi / beta);
  const PlaneFunction nu_alpha_f = [&](std::complex<double> w) { return f(alpha * w); };
  const PlaneFunction m_nu = [&](std::complex<double> w) {
    return m_lambda_apply(nu_alpha_f, w, params);
  };
  return c_s_apply(m_nu, z / alpha, s);
}

/// Eigenfunction transport from the integral-operator side to the
/// composition-operator side:
///   F(z) = (8 pi)^{1/4} int sqrt(cosh(2 sqrt(pi beta) xi)) f(xi)
///          exp(2 sqrt(pi beta) xi z - pi xi^2 - (beta/2) z^2) dxi.
/// This is the transform of sqrt(cosh) * f followed by the rescaling
/// z -> z sqrt(beta/pi): the sqrt(cosh) factor undoes the symmetrizing
/// conjugation of the quadrature section, so f enters in the section's own
/// coordinates. (An eigenfunction g written in the kernel's variable, which
/// is 2 sqrt(pi) times the section's, enters as f(xi) = g(2 sqrt(pi) xi).)
/// If f is an eigenvector of the normalized quadrature section for the
/// eigenvalue rho, then F satisfies the composition-operator eigenvalue
/// equation with the same rho.
inline std::complex<double> connection_forward(const HermiteCoefficients& f, Beta beta,
                                               std::complex<double> z, const ModelParams& params) {
  require_finite(beta, "connection_forward");
  if (beta.imag() != 0.0 || beta.real() < 0.0)
    throw std::domain_error("connection_forward: requires real beta >= 0");
  (void)params;
  const double b = beta.real();
  const double s = 2.0 * std::sqrt(pi * b);
  const std::complex<double> zfac = std::exp(-0.5 * b * z * z);
  const double norm = std::pow(8.0 * pi, 0.25);
  return detail::adaptive_gauss(
      [&](double xi) {
        return norm * std::sqrt(std::cosh(s * xi)) * f(xi) *
               std::exp(s * xi * z - pi * xi * xi) * zfac;
      },
      2.0 * pi);
}

/// One line of the operator-identity report.
struct IdentityCheck {
  std::string name;
  double max_dev;
  bool pass;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Evaluates the transform-conjugation identities on finite Hermite
/// combinations built from the seed degrees: translation and exponential
/// multiplication under the transform, the cosh-multiplication form of C_s,
/// and the rescaled composite against the pointwise composition operator.
inline IdentityReport verify_operator_identities(const std::vector<int>& seed_degrees, double tol,
                                                 const ModelParams& params = ModelParams(0.5),
                                                 double beta = 0.7) {
  if (seed_degrees.empty())
    throw std::domain_error("verify_operator_identities: need at least one seed degree");
  const std::vector<std::complex<double>> z_grid = {
      {0.4, 0.0}, {-0.3, 0.6}, {1.2, -0.5}, {0.0, 0.7}};

  std::vector<HermiteCoefficients> fs;
  for (int d : seed_degrees) {
    if (d < 0 || d > 64)
      throw std::domain_error("verify_operator_identities: seed degree out of range");
    HermiteCoefficients f;
    f.coeffs.assign(static_cast<std::size_t>(d) + 1, {0.0, 0.0});
    f.coeffs.back() = {1.0, 0.0};
    fs.push_back(std::move(f));
  }
  {
    // One mixed combination exercises linearity of every identity.
    HermiteCoefficients mix;
    std::size_t dim = 0;
    for (int d : seed_degrees) dim = std::max(dim, static_cast<std::size_t>(d) + 1);
    mix.coeffs.assign(dim, {0.0, 0.0});
    double w = 1.0;
    for (int d : seed_degrees) {
      mix.coeffs[static_cast<std::size_t>(d)] = {0.8 * w, -0.3 * w};
      w *= 0.6;
    }
    fs.push_back(std::move(mix));
  }

  IdentityReport report;
  const auto record = [&](const std::string& name, double dev) {
    report.checks.push_back(IdentityCheck{name, dev, dev < tol});
  };

  // Translation: transform of f(. - r) equals e^{-pi r^2/2} e^{pi r z} F(z - r).
  double dev = 0.0;
  for (double r : {0.0, 0.5, -1.1}) {
    for (const auto& f : fs) {
      const FockCoefficients cf = bargmann_transform(f);
      for (auto z : z_grid) {
        const std::complex<double> lhs =
            bargmann_transform([&](double xi) { return f(xi - r); }, z);
        const std::complex<double> rhs =
            std::exp(-0.5 * pi * r * r) * std::exp(pi * r * z) * cf(z - r);
        dev = std::max(dev, std::abs(lhs - rhs));
      }
    }
  }
  record("translation conjugation", dev);

  // Exponential multiplication: transform of e^{s xi} f equals
  // e^{s^2/8pi} e^{sz/2} F(z + s/2pi).
  dev = 0.0;
  for (double s : {0.0, 1.0, 2.5}) {
    for (const auto& f : fs) {
      const FockCoefficients cf = bargmann_transform(f);
      for (auto z : z_grid) {
        const std::complex<double> lhs =
            bargmann_transform([&](double xi) { return std::exp(s * xi) * f(xi); }, z);
        const std::complex<double> rhs = std::exp(s * s / (8.0 * pi)) *
                                         std::exp(0.5 * s * z) * cf(z + s / (2.0 * pi));
        dev = std::max(dev, std::abs(lhs - rhs));
      }
    }
  }
  record("exponential multiplication conjugation", dev);

  // cosh multiplication realizes C_s.
  dev = 0.0;
  for (double s : {1.0, 2.5}) {
    for (const auto& f : fs) {
      const FockCoefficients cf = bargmann_transform(f);
      const PlaneFunction cf_fn = [&](std::complex<double> w) { return cf(w); };
      for (auto z : z_grid) {
        const std::complex<double> lhs =
            bargmann_transform([&](double xi) { return std::cosh(s * xi) * f(xi); }, z);
        const std::complex<double> rhs = c_s_apply(cf_fn, z, s);
        dev = std::max(dev, std::abs(lhs - rhs));
      }
    }
  }
  record("cosh multiplication realizes the two-shift operator", dev);

  // Rescaled composite equals sqrt(lambda e^beta) times the pointwise
  // composition-operator action.
  dev = 0.0;
  const double scale = std::sqrt(params.lambda * std::exp(beta));
  for (const auto& f : fs) {
    const FockCoefficients cf = bargmann_transform(f);
    const PlaneFunction cf_fn = [&](std::complex<double> w) { return cf(w); };
    for (auto z : z_grid) {
      const std::complex<double> lhs = bargmann_composite_apply(cf_fn, z, beta, params);
      const std::complex<double> rhs =
          scale * apply_ruelle_pointwise(beta, cf_fn, z, params);
      dev = std::max(dev, std::abs(lhs - rhs));
    }
  }
  record("rescaled composite matches the composition operator", dev);

  return report;
}

}  // namespace kacbaker
