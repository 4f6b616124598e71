#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include "kacbaker/special.hpp"

namespace kacbaker {

/// Gauss rule for integrals over the whole line whose integrand carries a
/// Gaussian factor exp(-a x^2):  integral f(x) dx ~ sum_i weights[i] f(nodes[i]),
/// exact whenever f(x) = p(x) exp(-a x^2) with deg p <= 2Q-1. The weights
/// absorb the Gaussian, so f is evaluated as-is at the nodes.
struct GaussianQuadrature {
  double a = 0.0;
  std::vector<double> nodes;    // ascending, exactly symmetric about 0
  std::vector<double> weights;  // positive, symmetric
};

namespace detail {

/// Orthonormal Hermite functions for unit Gaussian weight, phi_k(t) =
/// (2 pi)^{-1/4} h_k(t / sqrt(2 pi)); same L^2(dt) normalization.
inline void phi_values(int kmax, double t, double* out) {
  hermite_values(kmax, t / std::sqrt(2.0 * pi), out);
  const double scale = std::pow(2.0 * pi, -0.25);
  for (int k = 0; k <= kmax; ++k) out[k] *= scale;
}

inline std::shared_ptr<const GaussianQuadrature> build_gaussian_quadrature(int q, double a) {
  // Nodes: eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal
  // sqrt(k/2)), i.e. the roots of the degree-q Hermite polynomial.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(q > 1 ? q - 1 : 0);
  for (int k = 1; k < q; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("gaussian_quadrature: tridiagonal eigensolve failed");
  std::vector<double> t(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) t[static_cast<std::size_t>(i)] = es.eigenvalues()[i];

  // Two Newton polish steps per node using phi_q; phi_q'(t) = sqrt(2q) phi_{q-1}(t) - t phi_q(t).
  std::vector<double> phi(static_cast<std::size_t>(q) + 1);
  for (auto& ti : t) {
    for (int it = 0; it < 2; ++it) {
      phi_values(q, ti, phi.data());
      const double pq = phi[static_cast<std::size_t>(q)];
      const double dq = std::sqrt(2.0 * q) * phi[static_cast<std::size_t>(q) - 1] - ti * pq;
      if (dq != 0.0) ti -= pq / dq;
    }
  }

  // Enforce exact +- symmetry so parity cancellations happen exactly.
  for (int i = 0; i < q / 2; ++i) {
    const double s = 0.5 * (t[static_cast<std::size_t>(q - 1 - i)] - t[static_cast<std::size_t>(i)]);
    t[static_cast<std::size_t>(i)] = -s;
    t[static_cast<std::size_t>(q - 1 - i)] = s;
  }
  if (q % 2 == 1) t[static_cast<std::size_t>(q / 2)] = 0.0;

  // Total weight at node t_i for unit weight: 1 / (q phi_{q-1}(t_i)^2);
  // rescaling x = t / sqrt(a) divides by sqrt(a).
  auto rule = std::make_shared<GaussianQuadrature>();
  rule->a = a;
  const double sqrta = std::sqrt(a);
  rule->nodes.resize(static_cast<std::size_t>(q));
  rule->weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i <= (q - 1) / 2; ++i) {
    phi_values(q - 1, t[static_cast<std::size_t>(i)], phi.data());
    const double pm = phi[static_cast<std::size_t>(q) - 1];
    const double w = 1.0 / (static_cast<double>(q) * pm * pm * sqrta);
    rule->weights[static_cast<std::size_t>(i)] = w;
    rule->weights[static_cast<std::size_t>(q - 1 - i)] = w;
  }
  for (int i = 0; i < q; ++i) rule->nodes[static_cast<std::size_t>(i)] = t[static_cast<std::size_t>(i)] / sqrta;
  return rule;
}

}  // namespace detail

/// Cached rule lookup; tables are computed once and shared read-only.
inline const GaussianQuadrature& gaussian_quadrature(int q, double a) {
  if (q < 1) throw std::domain_error("gaussian_quadrature: need at least one node");
  if (q > 4096) throw resource_limit_error("gaussian_quadrature: node count exceeds cap");
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::domain_error("gaussian_quadrature: Gaussian scale must be positive");

  static std::mutex mu;
  static std::map<std::pair<int, std::uint64_t>, std::shared_ptr<const GaussianQuadrature>> cache;
  const auto key = std::make_pair(q, std::bit_cast<std::uint64_t>(a));
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, detail::build_gaussian_quadrature(q, a)).first;
  return *it->second;
}

}  // namespace kacbaker
