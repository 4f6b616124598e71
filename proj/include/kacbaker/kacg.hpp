#pragma once

#include <numbers>

#include "kacbaker/operator_matrix.hpp"
#include "kacbaker/quadrature.hpp"
#include "kacbaker/special.hpp"

namespace kacbaker {

/// Gaussian kernel produced by resumming the Hermite series
///   sum_k lambda^k h_k(xi/(2 sqrt(pi))) h_k(eta/(2 sqrt(pi)))
///     = (1/sinh gamma)^{1/2} e^{gamma/2}
///       exp(-tanh(gamma/2)(xi^2+eta^2)/4 - (xi-eta)^2/(4 sinh gamma)).
inline double ktilde_kernel(double xi, double eta, const ModelParams& params) {
  const double g = params.gamma;
  return std::sqrt(1.0 / std::sinh(g)) * std::exp(0.5 * g) *
         std::exp(-0.25 * std::tanh(0.5 * g) * (xi * xi + eta * eta) -
                  (xi - eta) * (xi - eta) / (4.0 * std::sinh(g)));
}

/// Both sides of the Mehler identity at spin-variable scale: truncated series
/// on the left, the closed Gaussian form on the right, plus the hyperbolic
/// rewriting of the right side used by the kernel factorization.
struct MehlerSides {
  double lhs;             // sum_{k<K} lambda^k h_k(x) h_k(y)
  double rhs;             // sqrt(2/(1-l^2)) exp((-pi(1+l^2)(x^2+y^2) + 4 pi l x y)/(1-l^2))
  double rhs_hyperbolic;  // ktilde at xi = 2 sqrt(pi) x, eta = 2 sqrt(pi) y
};

inline MehlerSides mehler_sides(double lambda, double x, double y, int K) {
  const ModelParams params(lambda);  // validates lambda in (0,1)
  if (K < 1) throw std::domain_error("mehler_sides: need at least one term");
  if (K > 100000) throw resource_limit_error("mehler_sides: term count exceeds cap");

  const auto hx = hermite_values(K - 1, x);
  const auto hy = hermite_values(K - 1, y);
  KahanSum<double> acc;
  double lk = 1.0;
  for (int k = 0; k < K; ++k) {
    acc.add(lk * hx[static_cast<std::size_t>(k)] * hy[static_cast<std::size_t>(k)]);
    lk *= lambda;
  }

  const double l2 = lambda * lambda;
  const double rhs = std::sqrt(2.0 / (1.0 - l2)) *
                     std::exp((-pi * (1.0 + l2) * (x * x + y * y) + 4.0 * pi * lambda * x * y) /
                              (1.0 - l2));
  const double c = 2.0 * std::sqrt(pi);
  return MehlerSides{acc.value(), rhs, ktilde_kernel(c * x, c * y, params)};
}

/// Series length needed to exhaust the Mehler sum at (x, y) to relative
/// accuracy tol; terms decay like lambda^k once the functions flatten out.
inline int mehler_adaptive_terms(double lambda, double x, double y, double tol = 1e-14) {
  // Terms |l^k h_k h_k| <= l^k, so k > log(tol)/log(lambda) suffices; pad a bit.
  const int k = static_cast<int>(std::ceil(std::log(tol) / std::log(lambda))) + 48;
  (void)x;
  (void)y;
  return std::min(k, 100000);
}

/// Symmetric integral kernel of the full transfer operator at inverse
/// temperature beta (principal square roots off the physical axis):
///   K_beta(xi, eta) = sqrt(cosh(sqrt(beta) xi) cosh(sqrt(beta) eta) / (pi sinh gamma))
///                     * exp(-tanh(gamma/2)(xi^2+eta^2)/4 - (xi-eta)^2/(4 sinh gamma)).
inline std::complex<double> kac_kernel(Beta beta, double xi, double eta,
                                       const ModelParams& params) {
  require_finite(beta, "kac_kernel");
  const double g = params.gamma;
  const std::complex<double> sb = std::sqrt(beta);
  const std::complex<double> pref =
      std::sqrt(std::cosh(sb * xi) * std::cosh(sb * eta) / (pi * std::sinh(g)));
  return pref * std::exp(-0.25 * std::tanh(0.5 * g) * (xi * xi + eta * eta) -
                         (xi - eta) * (xi - eta) / (4.0 * std::sinh(g)));
}

/// Normalized kernel (lambda e^beta)^{-1/2} K_beta whose power traces equal
/// Z_n / (1-lambda)^n.
inline std::complex<double> g_kernel(Beta beta, double xi, double eta, const ModelParams& params) {
  return std::exp(-0.5 * (beta + std::log(params.lambda))) * kac_kernel(beta, xi, eta, params);
}

namespace detail {
// Exact non-negative integer power by repeated multiplication; avoids the
// exp(log) route, which mishandles a zero base.
inline std::complex<double> ipow(std::complex<double> base, int exponent) {
  std::complex<double> acc(1.0, 0.0);
  for (int i = 0; i < exponent; ++i) acc *= base;
  return acc;
}
}  // namespace detail

/// Matrix of the normalized integral operator in the Hermite basis, in closed
/// form. With mu = |n-m|/2 (entries vanish for odd |n-m|),
///   B_{n,m}(beta) = 2 min(n,m)! / sqrt(n! m!) e^{-(n+m) gamma/2}
///                   beta^mu L_{min(n,m)}^{2 mu}(-beta).
/// This is exactly the Hermite overlap integral
///   (lambda e^beta)^{-1/2} 2 e^{-(n+m+1) gamma/2} int h_n cosh(2 sqrt(pi beta) x) h_m dx,
/// the diagonal symmetrization of m_cosh composed with the resummed Gaussian
/// kernel; at beta = 0 it collapses to diag(2 lambda^n).
inline OperatorMatrix b_matrix(Beta beta, int N, const ModelParams& params) {
  require_finite(beta, "b_matrix");
  if (N < 1) throw std::domain_error("b_matrix: dimension must be positive");
  if (N > 1024) throw resource_limit_error("b_matrix: dimension exceeds cap");

  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    for (int m = n; m < N; m += 2) {
      const int lo = n;
      const int mu = (m - n) / 2;
      const double logmag = log_factorial(lo) - 0.5 * (log_factorial(n) + log_factorial(m)) -
                            0.5 * params.gamma * (n + m);
      const std::complex<double> val = 2.0 * std::exp(logmag) * detail::ipow(beta, mu) *
                                       laguerre_assoc(lo, 2 * mu, -beta);
      b(n, m) = val;
      b(m, n) = val;
    }
  }
  return OperatorMatrix{Basis::Hermite, beta, params, N, std::move(b)};
}

/// Closed form of the full trace, 2 (1-lambda)^{-1} exp(beta lambda/(1-lambda)).
inline std::complex<double> trace_g_closed_form(Beta beta, const ModelParams& params) {
  require_finite(beta, "trace_g_closed_form");
  const double lam = params.lambda;
  return 2.0 / (1.0 - lam) * std::exp(beta * lam / (1.0 - lam));
}

/// Hermite-basis section of the normalized integral operator built by
/// quadrature, restricted to real beta >= 0 where the operator is symmetric:
///   entry(n,m) = (lambda e^beta)^{-1/2} 2 sum_{k<K_cut} e^{-(k+1/2) gamma} c_{nk} c_{mk},
///   c_{nk} = integral h_n(x) sqrt(cosh(2 sqrt(pi beta) x)) h_k(x) dx.
/// The omitted k-tail is bounded by 2 e^{-(K_cut+1/2) gamma}/(1-lambda) times
/// the quadrature mass and reported alongside the matrix.
struct GQuadResult {
  OperatorMatrix matrix;
  double tail_bound;
};

inline GQuadResult g_matrix_quadrature(Beta beta, int N, const ModelParams& params, int q_nodes = 0,
                                       int k_cut = 0) {
  require_finite(beta, "g_matrix_quadrature");
  if (beta.imag() != 0.0 || beta.real() < 0.0)
    throw std::domain_error("g_matrix_quadrature: requires real beta >= 0");
  if (N < 1) throw std::domain_error("g_matrix_quadrature: dimension must be positive");
  if (N > 1024) throw resource_limit_error("g_matrix_quadrature: dimension exceeds cap");
  if (q_nodes <= 0) q_nodes = 4 * N;
  if (k_cut <= 0) k_cut = N + 40;

  const double b = beta.real();
  const double s = 2.0 * std::sqrt(pi * b);
  const auto& rule = gaussian_quadrature(q_nodes, 2.0 * pi);
  const int kh = std::max(N, k_cut);

  // Rows k of H hold sqrt(W_q) h_k(x_q); E holds sqrt(cosh(s x_q)) via logs
  // so large s x cannot overflow.
  Eigen::MatrixXd h(kh, q_nodes);
  Eigen::VectorXd e(q_nodes);
  std::vector<double> buf(static_cast<std::size_t>(kh));
  for (int qi = 0; qi < q_nodes; ++qi) {
    const double x = rule.nodes[static_cast<std::size_t>(qi)];
    const double sw = std::sqrt(rule.weights[static_cast<std::size_t>(qi)]);
    hermite_values(kh - 1, x, buf.data());
    for (int k = 0; k < kh; ++k) h(k, qi) = sw * buf[static_cast<std::size_t>(k)];
    const double t = std::abs(s * x);
    const double logcosh = t + std::log1p(std::exp(-2.0 * t)) - std::numbers::ln2;
    e(qi) = std::exp(0.5 * logcosh);
  }

  const Eigen::MatrixXd c = h * e.asDiagonal() * h.transpose();
  Eigen::VectorXd decay(k_cut);
  for (int k = 0; k < k_cut; ++k) decay(k) = 2.0 * std::exp(-(k + 0.5) * params.gamma);
  const double pref = std::exp(-0.5 * (b + std::log(params.lambda)));
  Eigen::MatrixXd g =
      pref * (c.block(0, 0, N, k_cut) * decay.asDiagonal() * c.block(0, 0, N, k_cut).transpose());
  g = 0.5 * (g + g.transpose()).eval();

  double mass = 0.0;
  for (int n = 0; n < N; ++n) {
    double row = 0.0;
    for (int qi = 0; qi < q_nodes; ++qi) {
      const double t = h(n, qi) * e(qi);
      row += t * t;
    }
    mass = std::max(mass, row);
  }
  const double tail =
      pref * 2.0 * std::exp(-(k_cut + 0.5) * params.gamma) / (1.0 - params.lambda) * mass;

  OperatorMatrix out{Basis::Hermite, beta, params, N, g.cast<std::complex<double>>()};
  return GQuadResult{std::move(out), tail};
}

}  // namespace kacbaker
