#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "kacbaker/core.hpp"

namespace kacbaker {

/// One periodic configuration of n Ising spins, each +1 or -1.
struct SpinConfig {
  int n = 0;
  std::vector<int> spins;

  /// Bit i of `mask` is site i; a set bit is spin +1. This fixed order makes
  /// enumeration output reproducible.
  static SpinConfig from_mask(int n, std::uint32_t mask) {
    if (n < 1 || n > 31) throw std::domain_error("SpinConfig: n outside [1,31]");
    SpinConfig c;
    c.n = n;
    c.spins.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c.spins[static_cast<std::size_t>(i)] = (mask >> i) & 1u ? 1 : -1;
    return c;
  }
};

/// Interaction energy attached to site k of an n-periodic configuration,
/// summed over all distances with weight lambda^d:
///   e_k = ( sum_{r=1}^{n-1} lambda^r s_k s_{(k+r) mod n} + lambda^n ) / (1 - lambda^n).
/// Closed form of the geometric tail over all periodic images.
inline double site_interaction_sum(const SpinConfig& config, int k, const ModelParams& params) {
  const int n = config.n;
  if (k < 0 || k >= n) throw std::out_of_range("site_interaction_sum: site index outside [0,n)");
  const double lam = params.lambda;
  double num = 0.0;
  double lr = 1.0;
  for (int r = 1; r < n; ++r) {
    lr *= lam;
    num += lr * static_cast<double>(config.spins[static_cast<std::size_t>(k)] *
                                    config.spins[static_cast<std::size_t>((k + r) % n)]);
  }
  lr *= lam;  // lambda^n
  num += lr;
  return num / (1.0 - lr);
}

struct PartitionOptions {
  int n_max = 24;  // enumeration cap: 2^n configurations
  int jobs = 1;
};

/// Partition function of the n-site periodic chain by exact enumeration:
///   Z_n(beta) = sum over all 2^n configurations of exp(beta * sum_k e_k).
/// Per-configuration cost is O(n) via spin-correlation popcounts; chunked
/// compensated sums are merged pairwise, so the value is independent of the
/// job count.
inline std::complex<double> partition_function_exact(int n, Beta beta, const ModelParams& params,
                                                     const PartitionOptions& opts = {}) {
  require_finite(beta, "partition_function_exact");
  if (n < 1) throw std::domain_error("partition_function_exact: n must be positive");
  if (n > opts.n_max || n > 31)
    throw resource_limit_error("partition_function_exact: 2^n enumeration exceeds n_max");

  const double lam = params.lambda;
  std::vector<double> lampow(static_cast<std::size_t>(n) + 1, 1.0);
  for (int r = 1; r <= n; ++r) lampow[static_cast<std::size_t>(r)] = lampow[static_cast<std::size_t>(r) - 1] * lam;
  const double denom = 1.0 - lampow[static_cast<std::size_t>(n)];

  // sum_k e_k = const0 - sum_r w_r * popcount(mask ^ rot_r(mask)),
  // where the popcount counts disagreeing spin pairs at distance r.
  double geo = 0.0;
  for (int r = 1; r < n; ++r) geo += lampow[static_cast<std::size_t>(r)];
  const double const0 = (static_cast<double>(n) * (geo + lampow[static_cast<std::size_t>(n)])) / denom;
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (int r = 1; r < n; ++r) w[static_cast<std::size_t>(r)] = 2.0 * lampow[static_cast<std::size_t>(r)] / denom;

  const std::uint32_t total = 1u << n;
  const std::uint32_t full_mask = total - 1u;
  const std::uint32_t chunk_size = 1u << 16;
  const int n_chunks = static_cast<int>((total + chunk_size - 1) / chunk_size);
  std::vector<std::complex<double>> partial(static_cast<std::size_t>(n_chunks));

  run_chunks(n_chunks, opts.jobs, [&](int c) {
    const std::uint32_t begin = static_cast<std::uint32_t>(c) * chunk_size;
    const std::uint32_t end = std::min(total, begin + chunk_size);
    KahanSum<std::complex<double>> acc;
    for (std::uint32_t mask = begin; mask < end; ++mask) {
      double u = const0;
      for (int r = 1; r < n; ++r) {
        const std::uint32_t rot = ((mask >> r) | (mask << (n - r))) & full_mask;
        u -= w[static_cast<std::size_t>(r)] * static_cast<double>(std::popcount(mask ^ rot));
      }
      acc.add(std::exp(beta * u));
    }
    partial[static_cast<std::size_t>(c)] = acc.value();
  });

  return pairwise_reduce(std::move(partial));
}

/// Z_n / (1 - lambda^n): the n-th power trace of the composition-type
/// transfer operator recovers the lattice partition function up to this
/// factor.
inline std::complex<double> exact_trace_ruelle_power(int n, Beta beta, const ModelParams& params,
                                                     const PartitionOptions& opts = {}) {
  const std::complex<double> z = partition_function_exact(n, beta, params, opts);
  return z / (1.0 - std::pow(params.lambda, n));
}

/// The same quantity reached through the integral-operator realization. The
/// kernel identity Z_n = 2 sinh(n gamma/2) e^{-n beta/2} tr K^n combined with
/// the normalization K -> (lambda e^beta)^{-1/2} K gives the prefactor
/// lambda^{n/2} 2 sinh(n gamma/2) = 1 - lambda^n, so both transfer operators
/// share one trace normalization (their spectra coincide).
inline std::complex<double> exact_trace_gutzwiller_power(int n, Beta beta, const ModelParams& params,
                                                         const PartitionOptions& opts = {}) {
  return exact_trace_ruelle_power(n, beta, params, opts);
}

/// Finite-size free-energy estimate -beta * (1/n) * log Z_n(beta). Note the
/// prefactor is -beta (not -1/beta); that is the convention used throughout
/// this code base.
inline double free_energy_estimate(Beta beta, int n, const ModelParams& params,
                                   const PartitionOptions& opts = {}) {
  if (beta.imag() != 0.0)
    throw std::domain_error("free_energy_estimate: beta must be real");
  const std::complex<double> z = partition_function_exact(n, beta, params, opts);
  return -beta.real() * std::log(z.real()) / static_cast<double>(n);
}

}  // namespace kacbaker
