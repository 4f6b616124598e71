#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "kacbaker/bargmann.hpp"
#include "kacbaker/kacg.hpp"
#include "kacbaker/model.hpp"
#include "kacbaker/ruelle.hpp"

namespace kacbaker {

/// Eigenvalues of one finite section, sorted by descending modulus.
/// convergence_estimate is filled by the dimension-doubling monitor: the
/// per-eigenvalue |change| of the tracked leading eigenvalues over the last
/// dimension increase (empty when the spectrum came from a single solve).
struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  int N = 0;
  std::vector<double> convergence_estimate;
};

namespace detail {

/// Diagonal similarity scaling (radix-2 Parlett-Reinsch sweep). Equalizing
/// row and column norms can shrink the backward error of the subsequent
/// Hessenberg iteration by many orders for the lopsided sections that large
/// |beta| produces; eigenvalues are untouched because this is a similarity.
inline void balance_in_place(Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  const double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r / radix) {
        c *= radix;
        r /= radix;
        f *= radix;
      }
      while (c >= r * radix) {
        c /= radix;
        r *= radix;
        f /= radix;
      }
      if (f != 1.0 && c + r < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

inline void sort_descending_modulus(std::vector<std::complex<double>>& v) {
  std::sort(v.begin(), v.end(), [](std::complex<double> x, std::complex<double> y) {
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
}

}  // namespace detail

/// All eigenvalues of a finite section. Exactly symmetric real sections
/// (both integral-operator constructions at real beta) take the symmetric
/// path and come out exactly real; everything else is balanced and handed to
/// the complex Hessenberg solver.
inline Spectrum eigenvalues(const OperatorMatrix& m) {
  if (!m.entries.allFinite())
    throw std::domain_error("eigenvalues: matrix has non-finite entries");
  const int n = m.dim;
  Spectrum out;
  out.N = n;
  out.eigenvalues.reserve(static_cast<std::size_t>(n));

  const bool real_input = m.entries.imag().cwiseAbs().maxCoeff() == 0.0;
  const bool symmetric = real_input && (m.entries - m.entries.transpose()).cwiseAbs().maxCoeff() == 0.0;
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.entries.real(),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigenvalues: symmetric QL iteration failed at dim " +
                               std::to_string(n));
    for (int i = 0; i < n; ++i) out.eigenvalues.emplace_back(es.eigenvalues()[i], 0.0);
  } else {
    Eigen::MatrixXcd a = m.entries;
    detail::balance_in_place(a);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("eigenvalues: Hessenberg iteration did not converge at dim " +
                               std::to_string(n) + " (per-row iteration budget exhausted)");
    for (int i = 0; i < n; ++i) out.eigenvalues.push_back(es.eigenvalues()[i]);
  }
  detail::sort_descending_modulus(out.eigenvalues);
  return out;
}

/// Grows the composition-operator section until the leading eigenvalues stop
/// moving: |change| of each of the top `tracked` eigenvalues, relative to
/// max(1, |rho_top|), must drop below tol between consecutive dimensions.
inline Spectrum spectrum_converged(Beta beta, const ModelParams& params, int n0 = 60, int dn = 20,
                                   double tol = 1e-10, int n_cap = 240, int tracked = 10) {
  if (n0 < 10) throw std::domain_error("spectrum_converged: initial dimension below 10");
  if (dn < 1) throw std::domain_error("spectrum_converged: dimension increment must be positive");
  if (n_cap < n0 + dn)
    throw std::domain_error("spectrum_converged: cap leaves no room to grow");

  Spectrum prev = eigenvalues(ruelle_matrix(beta, n0, params));
  for (int n = n0 + dn; n <= n_cap; n += dn) {
    Spectrum cur = eigenvalues(ruelle_matrix(beta, n, params));
    const int k = std::min<int>(tracked, static_cast<int>(prev.eigenvalues.size()));
    const double scale = std::max(1.0, std::abs(cur.eigenvalues.front()));
    std::vector<double> moved(static_cast<std::size_t>(k));
    double worst = 0.0;
    for (int i = 0; i < k; ++i) {
      moved[static_cast<std::size_t>(i)] =
          std::abs(cur.eigenvalues[static_cast<std::size_t>(i)] -
                   prev.eigenvalues[static_cast<std::size_t>(i)]);
      worst = std::max(worst, moved[static_cast<std::size_t>(i)] / scale);
    }
    cur.convergence_estimate = std::move(moved);
    if (worst <= tol) return cur;
    prev = std::move(cur);
  }
  throw std::runtime_error("spectrum_converged: leading eigenvalues still moving at dim cap " +
                           std::to_string(n_cap));
}

namespace detail {

/// det(I - z A) through a pivoted LU, accumulated as log-magnitude plus
/// phase so that huge or tiny factor products cannot overflow midway.
inline std::complex<double> det_one_minus(std::complex<double> z, const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXcd mat = Eigen::MatrixXcd::Identity(n, n) - z * a;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(mat);
  std::complex<double> phase =
      lu.permutationP().determinant() < 0 ? std::complex<double>(-1.0, 0.0)
                                          : std::complex<double>(1.0, 0.0);
  double logmag = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> d = lu.matrixLU()(i, i);
    const double ad = std::abs(d);
    if (ad == 0.0) return {0.0, 0.0};
    logmag += std::log(ad);
    phase *= d / ad;
  }
  return std::exp(logmag) * phase;
}

/// Real-matrix variant returning a signed value; used on the real beta axis
/// where the section is real and sign changes drive the zero bracketing.
inline double det_one_minus_real(double z, const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd mat = Eigen::MatrixXd::Identity(n, n) - z * a;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(mat);
  double sign = lu.permutationP().determinant() < 0 ? -1.0 : 1.0;
  double logmag = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = lu.matrixLU()(i, i);
    if (d == 0.0) return 0.0;
    if (d < 0.0) sign = -sign;
    logmag += std::log(std::abs(d));
  }
  return sign * std::exp(logmag);
}

}  // namespace detail

/// Fredholm determinant det(I - z L^{(N)}_beta) of the composition-operator
/// section.
inline std::complex<double> fredholm_det(Beta beta, std::complex<double> z, int N,
                                         const ModelParams& params) {
  return detail::det_one_minus(z, ruelle_matrix(beta, N, params).entries);
}

/// Trace-series route exp(-sum_{n<=n_max} z^n tr L^n / n) with exact power
/// traces from the lattice sums. Valid on |z| * rho_top < 1; agreement with
/// the matrix route is the standard two-route oracle for both.
inline std::complex<double> fredholm_det_series(Beta beta, std::complex<double> z,
                                                const ModelParams& params, int n_max = 20) {
  if (n_max < 1) throw std::domain_error("fredholm_det_series: need at least one term");
  if (n_max > 24)
    throw resource_limit_error("fredholm_det_series: exact traces capped at 2^24 enumeration");
  KahanSum<std::complex<double>> s;
  std::complex<double> zn(1.0, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    zn *= z;
    s.add(zn * exact_trace_ruelle_power(n, beta, params) / static_cast<double>(n));
  }
  return std::exp(-s.value());
}

enum class ZetaFlag { Regular, LimitEvaluated, Indeterminate };

inline const char* to_string(ZetaFlag f) {
  switch (f) {
    case ZetaFlag::Regular: return "regular";
    case ZetaFlag::LimitEvaluated: return "limit";
    default: return "indeterminate";
  }
}

/// One evaluation of the dynamical zeta function
///   zeta(z, beta) = det(I - z lambda L_beta) / det(I - z L_beta).
/// value * denominator = numerator whenever the flag is Regular.
struct ZetaEvaluation {
  std::complex<double> z;
  Beta beta;
  std::complex<double> numerator;
  std::complex<double> denominator;
  std::complex<double> value;
  ZetaFlag flag = ZetaFlag::Regular;
};

/// Evaluates the determinant ratio. When both determinants vanish (below
/// eps_cancel) the common zero is removed by the derivative ratio in z,
/// central differences with one Richardson sweep, and the result is flagged
/// limit-evaluated; an unstable derivative ratio yields the indeterminate
/// flag and no fabricated value.
inline ZetaEvaluation zeta_value(std::complex<double> z, Beta beta, int N,
                                 const ModelParams& params, double eps_cancel = 1e-10) {
  const OperatorMatrix m = ruelle_matrix(beta, N, params);
  const auto det_at = [&](std::complex<double> w) {
    return detail::det_one_minus(w, m.entries);
  };
  const double lam = params.lambda;

  ZetaEvaluation out;
  out.z = z;
  out.beta = beta;
  out.numerator = det_at(z * lam);
  out.denominator = det_at(z);
  if (std::abs(out.numerator) >= eps_cancel || std::abs(out.denominator) >= eps_cancel) {
    out.value = out.numerator / out.denominator;
    out.flag = ZetaFlag::Regular;
    return out;
  }

  const auto derivatives = [&](double h) {
    const std::complex<double> dn =
        (det_at((z + h) * lam) - det_at((z - h) * lam)) / (2.0 * h);
    const std::complex<double> dd = (det_at(z + h) - det_at(z - h)) / (2.0 * h);
    return std::make_pair(dn, dd);
  };
  const auto [dn1, dd1] = derivatives(1e-6);
  const auto [dn2, dd2] = derivatives(0.5e-6);
  const std::complex<double> dn = (4.0 * dn2 - dn1) / 3.0;
  const std::complex<double> dd = (4.0 * dd2 - dd1) / 3.0;

  if (!std::isfinite(std::abs(dn)) || !std::isfinite(std::abs(dd)) || std::abs(dd) < 1e-12) {
    out.flag = ZetaFlag::Indeterminate;
    out.value = std::complex<double>(std::nan(""), std::nan(""));
    return out;
  }
  out.value = dn / dd;
  out.flag = ZetaFlag::LimitEvaluated;
  return out;
}

/// One located zero or pole. kind is "nontrivial-real" (zero of the
/// numerator determinant on the real axis), "pole" (zero of the denominator
/// determinant), or "trivial-line" (Newton-refined zero on the half-period
/// line available at lambda = 1/2).
struct LocatedZero {
  std::complex<double> location;
  double residual = 0.0;
  std::string kind;
};

struct ZeroSearchResult {
  std::vector<LocatedZero> zeros;
  double range_min = 0.0;
  double range_max = 0.0;
  double step = 0.0;
  int N = 0;
  std::vector<std::string> notes;
};

namespace detail {

/// Bisection refinement of pre-evaluated sign brackets. Width target 1e-10;
/// residual reported as |d| at the located point.
inline void refine_brackets(const std::vector<double>& xs, const std::vector<double>& vs,
                            const std::function<double(double)>& d, const char* kind,
                            std::vector<LocatedZero>& out) {
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    double a = xs[i], b = xs[i + 1];
    double fa = vs[i], fb = vs[i + 1];
    if (fa == 0.0) {
      out.push_back(LocatedZero{{a, 0.0}, 0.0, kind});
      continue;
    }
    if (fa * fb >= 0.0) continue;
    while (b - a > 1e-10) {
      const double mid = 0.5 * (a + b);
      const double fm = d(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if (fa * fm < 0.0) {
        b = mid;
        fb = fm;
      } else {
        a = mid;
        fa = fm;
      }
    }
    const double loc = 0.5 * (a + b);
    out.push_back(LocatedZero{{loc, 0.0}, std::abs(d(loc)), kind});
  }
}

}  // namespace detail

/// Scans det(I - lambda L_beta) over a real beta interval for zeros
/// ("nontrivial-real": some eigenvalue passes through 1/lambda) and
/// det(I - L_beta) for poles (some eigenvalue passes through 1). Both
/// determinants are evaluated from one section build per grid point.
inline ZeroSearchResult find_real_zeros(double beta_min, double beta_max,
                                        const ModelParams& params, int N = 120,
                                        double step = 0.05) {
  if (!(beta_max > beta_min)) throw std::domain_error("find_real_zeros: empty interval");
  if (!(step > 0.0)) throw std::domain_error("find_real_zeros: step must be positive");

  const auto section = [&](double b) {
    return Eigen::MatrixXd(ruelle_matrix(Beta(b, 0.0), N, params).entries.real());
  };
  const double lam = params.lambda;
  const int grid = std::max(1, static_cast<int>(std::ceil((beta_max - beta_min) / step)));
  std::vector<double> xs(static_cast<std::size_t>(grid) + 1);
  std::vector<double> v_num(xs.size()), v_den(xs.size());
  for (int i = 0; i <= grid; ++i) {
    const double b = (i == grid) ? beta_max : beta_min + step * i;
    const Eigen::MatrixXd a = section(b);
    xs[static_cast<std::size_t>(i)] = b;
    v_num[static_cast<std::size_t>(i)] = detail::det_one_minus_real(lam, a);
    v_den[static_cast<std::size_t>(i)] = detail::det_one_minus_real(1.0, a);
  }

  ZeroSearchResult res;
  res.range_min = beta_min;
  res.range_max = beta_max;
  res.step = step;
  res.N = N;
  detail::refine_brackets(
      xs, v_num, [&](double b) { return detail::det_one_minus_real(lam, section(b)); },
      "nontrivial-real", res.zeros);
  detail::refine_brackets(
      xs, v_den, [&](double b) { return detail::det_one_minus_real(1.0, section(b)); }, "pole",
      res.zeros);
  std::sort(res.zeros.begin(), res.zeros.end(), [](const LocatedZero& x, const LocatedZero& y) {
    if (x.location.real() != y.location.real()) return x.location.real() < y.location.real();
    return x.kind < y.kind;
  });
  return res;
}

/// Newton refinement of det(I - lambda L_beta) = 0 from the half-period
/// starting points log 2 + 2 pi i n. Only lambda = 1/2 carries the exact
/// line of zeros, so other lambdas are rejected. Non-convergence for one n
/// is recorded in notes and skipped.
inline ZeroSearchResult find_line_zeros(const ModelParams& params, int n_min, int n_max,
                                        int N = 80) {
  if (params.lambda != 0.5)
    throw std::domain_error("find_line_zeros: the zero line is available only at lambda = 1/2");
  if (n_max < n_min) throw std::domain_error("find_line_zeros: empty index range");

  ZeroSearchResult res;
  res.range_min = n_min;
  res.range_max = n_max;
  res.step = 1.0;
  res.N = N;
  const double lam = params.lambda;
  const auto f = [&](Beta b) {
    return detail::det_one_minus(lam, ruelle_matrix(b, N, params).entries);
  };
  for (int n = n_min; n <= n_max; ++n) {
    Beta b(std::numbers::ln2, 2.0 * pi * n);
    const Beta start = b;
    bool ok = false;
    std::complex<double> fb = f(b);
    for (int it = 0; it < 40; ++it) {
      const double h = 1e-7;
      const std::complex<double> df = (f(b + h) - f(b - h)) / (2.0 * h);
      if (std::abs(df) == 0.0) break;
      const std::complex<double> delta = fb / df;
      b -= delta;
      fb = f(b);
      if (std::abs(delta) < 1e-11 * std::max(1.0, std::abs(b))) {
        ok = true;
        break;
      }
    }
    if (!ok || std::abs(b - start) > 1.0) {
      res.notes.push_back("n=" + std::to_string(n) + ": Newton did not settle");
      continue;
    }
    res.zeros.push_back(LocatedZero{b, std::abs(fb), "trivial-line"});
  }
  return res;
}

/// Leading eigenvalues of each parity block divided by their large-|beta|
/// asymptotes. For beta -> +infinity both parity families approach
/// lambda^i exp(lambda beta / (1 - lambda)); for beta -> -infinity the
/// families approach +-(-1)^i lambda^i exp(-lambda beta / (1 + lambda)),
/// the even class carrying (-1)^i and the odd class the opposite sign.
struct AsymptoticRatios {
  std::vector<std::complex<double>> even;
  std::vector<std::complex<double>> odd;
};

inline AsymptoticRatios asymptotic_ratios(double beta, int count, const ModelParams& params,
                                          int N = 120) {
  if (!(params.lambda > 0.0) || !(params.lambda < 0.5))
    throw std::domain_error("asymptotic_ratios: asymptotics hold for lambda in (0, 1/2)");
  if (count < 1) throw std::domain_error("asymptotic_ratios: need at least one ratio");

  const ParityPair blocks = parity_matrices(Beta(beta, 0.0), N, params);
  const Spectrum se = eigenvalues(blocks.even);
  const Spectrum so = eigenvalues(blocks.odd);
  const double lam = params.lambda;
  const double envelope = beta >= 0.0 ? std::exp(lam * beta / (1.0 - lam))
                                      : std::exp(-lam * beta / (1.0 + lam));

  AsymptoticRatios out;
  for (int i = 0; i < count; ++i) {
    const double mag = std::pow(lam, i) * envelope;
    double sign_even = 1.0, sign_odd = 1.0;
    if (beta < 0.0) {
      sign_even = (i % 2 == 0) ? 1.0 : -1.0;
      sign_odd = -sign_even;
    }
    out.even.push_back(se.eigenvalues.at(static_cast<std::size_t>(i)) / (sign_even * mag));
    out.odd.push_back(so.eigenvalues.at(static_cast<std::size_t>(i)) / (sign_odd * mag));
  }
  return out;
}

/// Pairing of the leading eigenvalues of the two realizations.
struct MatchedPair {
  std::complex<double> rho_composition;
  std::complex<double> rho_integral;
  double deviation = 0.0;  // |difference| / |rho_composition|
};

struct SpectraMatchReport {
  std::vector<MatchedPair> pairs;
  double max_deviation = 0.0;
  bool pass = false;
};

/// Greedy modulus-ordered matching of the top eigenvalues of the
/// composition-operator section against the integral-operator quadrature
/// section. The two constructions share a spectrum in exact arithmetic,
/// so per-pair deviations measure truncation plus quadrature error only.
inline SpectraMatchReport spectra_match(double beta, const ModelParams& params, int n_comp = 80,
                                        int n_int = 60, double tol = 1e-6, int count = 10) {
  if (!(beta >= 0.0)) throw std::domain_error("spectra_match: requires real beta >= 0");
  const Spectrum sl = eigenvalues(ruelle_matrix(Beta(beta, 0.0), n_comp, params));
  const Spectrum sg = eigenvalues(g_matrix_quadrature(Beta(beta, 0.0), n_int, params).matrix);

  const int pool = std::min<int>(count + 5, static_cast<int>(sg.eigenvalues.size()));
  std::vector<bool> used(static_cast<std::size_t>(pool), false);
  SpectraMatchReport report;
  for (int i = 0; i < count && i < static_cast<int>(sl.eigenvalues.size()); ++i) {
    const std::complex<double> rho = sl.eigenvalues[static_cast<std::size_t>(i)];
    int best = -1;
    double best_dist = 0.0;
    for (int j = 0; j < pool; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double dist = std::abs(rho - sg.eigenvalues[static_cast<std::size_t>(j)]);
      if (best < 0 || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    if (best < 0) break;
    used[static_cast<std::size_t>(best)] = true;
    MatchedPair p;
    p.rho_composition = rho;
    p.rho_integral = sg.eigenvalues[static_cast<std::size_t>(best)];
    p.deviation = best_dist / std::max(std::abs(rho), 1e-300);
    report.max_deviation = std::max(report.max_deviation, p.deviation);
    report.pairs.push_back(p);
  }
  report.pass = !report.pairs.empty() && report.max_deviation < tol;
  return report;
}

/// Residual of the transported eigenfunction.
struct ConnectionCheckReport {
  int index = 0;
  std::complex<double> eigenvalue;
  double residual = 0.0;  // max over sample points of |L F - rho F| / max|F|
  int cluster_size = 1;   // >1: residual measured against the invariant subspace
};

/// Takes the `which`-th eigenvector of the integral-operator quadrature
/// section (modulus order), transports it through the connection integral,
/// and evaluates the composition-operator eigenvalue equation pointwise.
/// For a degenerate eigenvalue the whole near-degenerate cluster is
/// transported and the residual is measured against its span.
inline ConnectionCheckReport eigenfunction_connection_check(double beta, int which,
                                                            const ModelParams& params,
                                                            int N = 40) {
  if (!(beta >= 0.0))
    throw std::domain_error("eigenfunction_connection_check: requires real beta >= 0");
  if (which < 0 || which >= N)
    throw std::domain_error("eigenfunction_connection_check: eigen-index out of range");

  const auto g = g_matrix_quadrature(Beta(beta, 0.0), N, params);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix.entries.real());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigenfunction_connection_check: eigensolve failed");

  std::vector<int> order(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });
  const double rho = es.eigenvalues()[order[static_cast<std::size_t>(which)]];
  const double top = std::abs(es.eigenvalues()[order[0]]);

  std::vector<int> cluster;
  for (int i = 0; i < N; ++i) {
    if (std::abs(es.eigenvalues()[order[static_cast<std::size_t>(i)]] - rho) <= 1e-8 * top)
      cluster.push_back(order[static_cast<std::size_t>(i)]);
  }

  const std::vector<std::complex<double>> pts = {
      {0.1, 0.0},  {0.0, 0.3},   {-0.2, 0.1}, {0.4, 0.0},
      {-0.35, 0.0}, {0.15, 0.25}, {-0.1, -0.3}, {0.05, -0.15}};

  const auto transported = [&](int col) {
    HermiteCoefficients f;
    f.coeffs.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i)
      f.coeffs[static_cast<std::size_t>(i)] = es.eigenvectors()(i, col);
    std::vector<std::complex<double>> vals;
    std::vector<std::complex<double>> lvals;
    const auto F = [&](std::complex<double> w) {
      return connection_forward(f, Beta(beta, 0.0), w, params);
    };
    for (auto z : pts) {
      vals.push_back(F(z));
      lvals.push_back(apply_ruelle_pointwise(Beta(beta, 0.0), F, z, params));
    }
    return std::make_pair(vals, lvals);
  };

  ConnectionCheckReport report;
  report.index = which;
  report.eigenvalue = rho;
  report.cluster_size = static_cast<int>(cluster.size());

  if (cluster.size() == 1) {
    const auto [vals, lvals] = transported(cluster[0]);
    double fscale = 0.0;
    for (const auto& v : vals) fscale = std::max(fscale, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      worst = std::max(worst, std::abs(lvals[i] - rho * vals[i]));
    report.residual = worst / std::max(fscale, 1e-300);
    return report;
  }

  // Degenerate cluster: L maps the transported span to itself; fit the image
  // in the span at the sample points and report the off-span remainder.
  const std::size_t c = cluster.size();
  Eigen::MatrixXcd a(pts.size(), c);
  std::vector<std::vector<std::complex<double>>> images(c);
  double fscale = 0.0;
  for (std::size_t j = 0; j < c; ++j) {
    const auto [vals, lvals] = transported(cluster[j]);
    for (std::size_t i = 0; i < pts.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vals[i];
    for (const auto& v : vals) fscale = std::max(fscale, std::abs(v));
    images[j] = lvals;
  }
  double worst = 0.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
  for (std::size_t j = 0; j < c; ++j) {
    Eigen::VectorXcd y(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) y(static_cast<Eigen::Index>(i)) = images[j][i];
    const Eigen::VectorXcd resid = a * qr.solve(y) - y;
    worst = std::max(worst, resid.cwiseAbs().maxCoeff());
  }
  report.residual = worst / std::max(fscale, 1e-300);
  return report;
}

}  // namespace kacbaker
