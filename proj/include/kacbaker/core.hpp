#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kacbaker {

inline constexpr double pi = std::numbers::pi;

/// Inverse temperature. The coupling constant is absorbed into beta, so all
/// formulas below depend on the product only. Real on the physical axis,
/// complex for zeta-function work.
using Beta = std::complex<double>;

/// Thrown when a request exceeds a hard resource cap (enumeration size,
/// truncation dimension, table size).
class resource_limit_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_finite(Beta beta, const char* where) {
  if (!std::isfinite(beta.real()) || !std::isfinite(beta.imag()))
    throw std::domain_error(std::string(where) + ": beta must be finite");
}

/// Interaction decay rate of the chain: spins at distance d couple with
/// strength lambda^d, lambda = exp(-gamma) in (0,1).
struct ModelParams {
  double lambda;
  double gamma;  // -log(lambda)

  explicit ModelParams(double lambda_)
      : lambda(lambda_), gamma(-std::log(lambda_)) {
    if (!std::isfinite(lambda_) || !(lambda_ > 0.0) || !(lambda_ < 1.0))
      throw std::domain_error("ModelParams: lambda must lie in (0,1)");
  }
};

/// Compensated (Kahan) accumulator; works for double and complex<double>
/// since the correction arithmetic is componentwise.
template <class T>
struct KahanSum {
  T sum{};
  T comp{};

  void add(T v) {
    T y = v - comp;
    T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  T value() const { return sum; }
};

/// Pairwise reduction of partial sums. The tree shape depends only on the
/// number of inputs, so results are independent of how work was chunked.
template <class T>
T pairwise_reduce(std::vector<T> xs) {
  if (xs.empty()) return T{};
  while (xs.size() > 1) {
    std::size_t half = (xs.size() + 1) / 2;
    for (std::size_t i = 0; i + half < xs.size(); ++i) xs[i] += xs[i + half];
    xs.resize(half);
  }
  return xs[0];
}

inline constexpr int kMaxFactorialArg = 4096;

inline double log_factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(kMaxFactorialArg + 1, 0.0);
    long double acc = 0.0L;
    for (int i = 1; i <= kMaxFactorialArg; ++i) {
      acc += std::log(static_cast<long double>(i));
      t[i] = static_cast<double>(acc);
    }
    return t;
  }();
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  if (n > kMaxFactorialArg)
    throw resource_limit_error("log_factorial: argument exceeds table");
  return table[n];
}

inline double log_choose(int n, int k) {
  if (k < 0 || k > n) throw std::domain_error("log_choose: k outside [0,n]");
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// Runs fn(chunk) for chunk in [0, n_chunks) on up to `jobs` threads. Each
/// chunk writes only its own output slot, so the result is identical for any
/// job count.
inline void run_chunks(int n_chunks, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || n_chunks <= 1) {
    for (int c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      for (int c = t; c < n_chunks; c += jobs) fn(c);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace kacbaker
