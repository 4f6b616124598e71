#pragma once

#include <vector>

#include "kacbaker/core.hpp"

namespace kacbaker {

/// Orthonormal Hermite functions on the real line in the normalization
///   h_0(x) = 2^{1/4} exp(-pi x^2),
///   h_{k+1}(x) = sqrt(pi/(k+1)) 2x h_k(x) - sqrt(k/(k+1)) h_{k-1}(x),
/// so that integral h_j h_k dx = delta_{jk}. Writes h_0..h_kmax into `out`.
///
/// The recurrence runs on a mantissa/exponent pair: at large |x| the seed
/// underflows double precision long before the oscillatory region is
/// reached, and a plain recurrence would freeze at zero.
inline void hermite_values(int kmax, double x, double* out) {
  if (kmax < 0) throw std::domain_error("hermite_values: negative degree");
  const double ln2 = std::numbers::ln2;
  const double lh0 = 0.25 * ln2 - pi * x * x;

  int e = 0;
  double u;  // h_0 * 2^{-e}
  if (lh0 < -600.0) {
    e = static_cast<int>(std::floor((lh0 + 600.0) / ln2));
    u = std::exp(lh0 - static_cast<double>(e) * ln2);
  } else {
    u = std::exp(lh0);
  }
  double uprev = 0.0;  // h_{-1} on the same scale
  out[0] = std::ldexp(u, e);

  for (int k = 0; k < kmax; ++k) {
    const double unext = std::sqrt(pi / (k + 1)) * 2.0 * x * u -
                         std::sqrt(static_cast<double>(k) / (k + 1)) * uprev;
    uprev = u;
    u = unext;
    const double au = std::max(std::abs(u), std::abs(uprev));
    if (au > 0x1p+500) {
      u = std::ldexp(u, -500);
      uprev = std::ldexp(uprev, -500);
      e += 500;
    } else if (au < 0x1p-500 && au > 0.0 && e < -500) {
      u = std::ldexp(u, 500);
      uprev = std::ldexp(uprev, 500);
      e -= 500;
    }
    out[k + 1] = std::ldexp(u, e);
  }
}

inline std::vector<double> hermite_values(int kmax, double x) {
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
  hermite_values(kmax, x, out.data());
  return out;
}

inline double hermite_h(int k, double x) {
  if (k < 0) throw std::domain_error("hermite_h: negative degree");
  std::vector<double> buf(static_cast<std::size_t>(k) + 1);
  hermite_values(k, x, buf.data());
  return buf[static_cast<std::size_t>(k)];
}

/// Associated Laguerre polynomial L_n^a(x) by the three-term recurrence
///   (k+1) L_{k+1}^a = (2k+1+a-x) L_k^a - (k+a) L_{k-1}^a.
/// Instantiated for real and complex arguments.
template <class T>
T laguerre_assoc(int n, int a, T x) {
  if (n < 0 || a < 0) throw std::domain_error("laguerre_assoc: need n >= 0 and a >= 0");
  T lm1 = T(1);  // L_0
  if (n == 0) return lm1;
  T l = T(1 + a) - x;  // L_1
  for (int k = 1; k < n; ++k) {
    T ln = ((T(2 * k + 1 + a) - x) * l - T(k + a) * lm1) / T(k + 1);
    lm1 = l;
    l = ln;
  }
  return l;
}

}  // namespace kacbaker
