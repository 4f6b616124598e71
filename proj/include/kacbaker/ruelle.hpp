#pragma once

#include <quadmath.h>

#include <algorithm>

#include "kacbaker/operator_matrix.hpp"

namespace kacbaker {

namespace detail {

inline __float128 log_factorial_q(int n) {
  static const std::vector<__float128> table = [] {
    std::vector<__float128> t(kMaxFactorialArg + 1);
    t[0] = 0;
    for (int i = 1; i <= kMaxFactorialArg; ++i)
      t[i] = t[i - 1] + logq(static_cast<__float128>(i));
    return t;
  }();
  return table[static_cast<std::size_t>(n)];
}

inline __float128 log_choose_q(int n, int k) {
  return log_factorial_q(n) - log_factorial_q(k) - log_factorial_q(n - k);
}

}  // namespace detail

/// Matrix of the two-branch composition operator
///   (L_beta g)(z) = e^{beta z} g(lambda + lambda z) + e^{-beta z} g(-lambda + lambda z)
/// on monomials z^k, truncated to degrees < N. Acting on z^k and expanding,
///   entry(m, k) = lambda^k (1 + (-1)^{m+k}) sum_{i=0}^{min(m,k)} C(k,i) beta^{m-i}/(m-i)!,
/// so entries vanish for odd m+k and the truncation is upper triangular at
/// beta = 0 with diagonal 2 lambda^k.
///
/// Terms are combined through log-factorial tables. For beta with a negative
/// real part the sum alternates and can cancel by many orders of magnitude,
/// so everything off the nonnegative real axis is accumulated in quad
/// precision; for real beta >= 0 all terms are positive and compensated
/// double summation is already exact to working accuracy.
inline OperatorMatrix ruelle_matrix(Beta beta, int N, const ModelParams& params) {
  require_finite(beta, "ruelle_matrix");
  if (N < 1) throw std::domain_error("ruelle_matrix: dimension must be positive");
  if (N > 2048) throw resource_limit_error("ruelle_matrix: dimension exceeds cap");

  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(N, N);
  const double lam = params.lambda;

  if (beta == Beta(0.0, 0.0)) {
    for (int k = 0; k < N; ++k) {
      const double lamk = std::pow(lam, k);
      for (int m = k % 2; m <= k; m += 2)
        a(m, k) = 2.0 * lamk * std::exp(log_choose(k, m));
    }
    return OperatorMatrix{Basis::Monomial, beta, params, N, std::move(a)};
  }

  const bool real_nonneg = beta.imag() == 0.0 && beta.real() > 0.0;
  if (real_nonneg) {
    const double lb = std::log(beta.real());
    for (int k = 0; k < N; ++k) {
      const double lamk = std::pow(lam, k);
      for (int m = k % 2; m < N; m += 2) {
        KahanSum<double> s;
        const int top = std::min(m, k);
        for (int i = 0; i <= top; ++i) {
          const int p = m - i;
          s.add(std::exp(log_choose(k, i) + p * lb - log_factorial(p)));
        }
        a(m, k) = 2.0 * lamk * s.value();
      }
    }
    return OperatorMatrix{Basis::Monomial, beta, params, N, std::move(a)};
  }

  const bool real_axis = beta.imag() == 0.0;
  const __float128 br = static_cast<__float128>(beta.real());
  const __float128 bi = static_cast<__float128>(beta.imag());
  const __float128 labs = 0.5q * logq(br * br + bi * bi);
  const __float128 barg = real_axis ? 0.0q : atan2q(bi, br);

  for (int k = 0; k < N; ++k) {
    const double lamk = std::pow(lam, k);
    for (int m = k % 2; m < N; m += 2) {
      __float128 sre = 0, sim = 0;
      const int top = std::min(m, k);
      for (int i = 0; i <= top; ++i) {
        const int p = m - i;
        const __float128 mag =
            expq(detail::log_choose_q(k, i) + p * labs - detail::log_factorial_q(p));
        if (real_axis) {
          sre += (p & 1) ? -mag : mag;  // beta < 0 here, so beta^p carries (-1)^p
        } else {
          const __float128 ph = p * barg;
          sre += mag * cosq(ph);
          sim += mag * sinq(ph);
        }
      }
      a(m, k) = std::complex<double>(2.0 * lamk * static_cast<double>(sre),
                                     2.0 * lamk * static_cast<double>(sim));
    }
  }
  return OperatorMatrix{Basis::Monomial, beta, params, N, std::move(a)};
}

/// Direct pointwise action of the operator on an arbitrary function.
inline std::complex<double> apply_ruelle_pointwise(
    Beta beta, const std::function<std::complex<double>(std::complex<double>)>& f,
    std::complex<double> z, const ModelParams& params) {
  require_finite(beta, "apply_ruelle_pointwise");
  const double lam = params.lambda;
  return std::exp(beta * z) * f(lam + lam * z) + std::exp(-beta * z) * f(-lam + lam * z);
}

/// Even/odd restriction of the operator. Because entries vanish for odd
/// m+k, the matrix decouples exactly into the two sub-bases {z^{2j}} and
/// {z^{2j+1}}; the blocks are returned as matrices in their own right.
struct ParityPair {
  OperatorMatrix even;
  OperatorMatrix odd;
};

inline ParityPair parity_matrices(Beta beta, int N, const ModelParams& params) {
  const OperatorMatrix full = ruelle_matrix(beta, N, params);
  const int ne = (N + 1) / 2;
  const int no = N / 2;
  Eigen::MatrixXcd even(ne, ne), odd(no, no);
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < ne; ++j) even(i, j) = full.entries(2 * i, 2 * j);
  for (int i = 0; i < no; ++i)
    for (int j = 0; j < no; ++j) odd(i, j) = full.entries(2 * i + 1, 2 * j + 1);
  return ParityPair{OperatorMatrix{Basis::Monomial, beta, params, ne, std::move(even)},
                    OperatorMatrix{Basis::Monomial, beta, params, no, std::move(odd)}};
}

/// trace(A^n) of a finite section by repeated multiplication. Power traces
/// are only ever needed for small n, where this is exact enough and cheaper
/// than a Schur decomposition.
inline std::complex<double> truncated_trace_power(const OperatorMatrix& m, int n) {
  if (n < 1) throw std::domain_error("truncated_trace_power: power must be positive");
  if (n > 64) throw resource_limit_error("truncated_trace_power: power exceeds cap");
  if (n == 1) return m.entries.trace();
  Eigen::MatrixXcd p = m.entries;
  for (int i = 1; i < n; ++i) p = p * m.entries;
  return p.trace();
}

}  // namespace kacbaker
