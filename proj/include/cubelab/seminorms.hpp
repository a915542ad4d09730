// Host-Kra seminorm estimators.
//
// Three routes that never share code paths, so they can check each other:
//   - seminorm_recursive: the finite-sample recursion
//       est_1 = |mean_N|,  est_k^{2^k} = (1/H) sum_{h=1}^H est_{k-1}(a * a o T^h)^{2^{k-1}}
//   - box_norm_cyclic: direct enumeration of the Gowers box average on Z_p
//   - u2_fourier: fourth moment of the Fourier coefficients (level 2 only)
//
// On cyclic systems with N and H full multiples of p, the recursion computes
// exactly the same finite averages as the box enumeration; that agreement is
// the module's main cross-check.

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cubelab/common.hpp"
#include "cubelab/fft.hpp"
#include "cubelab/orbits.hpp"

namespace cubelab {

struct SeminormEstimate {
  double value = 0.0;
  int level = 1;
  std::size_t N = 0;
  std::size_t H = 0;
  std::string method;
};

/// Default differencing horizon, balancing h-average variance against the
/// orbit length N + (k-1)H the recursion consumes.
inline std::size_t default_h(std::size_t N) {
  const auto h = static_cast<std::size_t>(std::sqrt(static_cast<double>(N)));
  return std::max<std::size_t>(1, h);
}

namespace detail {

/// Returns est_level^{2^level} for the window [0, N) of a.
/// a must have length >= N + (level-1) * H.
inline double seminorm_pow(std::span<const double> a, int level, std::size_t N, std::size_t H,
                           std::vector<std::vector<double>>& scratch, int depth) {
  if (level == 1) {
    CompensatedSum acc;
    for (std::size_t n = 0; n < N; ++n) acc.add(a[n]);
    const double m = acc.value() / static_cast<double>(N);
    return m * m;
  }
  // scratch is pre-sized by the caller; resizing here would invalidate the
  // buffer references held by enclosing recursion frames.
  auto& prod = scratch[static_cast<std::size_t>(depth)];
  const std::size_t child_len = N + static_cast<std::size_t>(level - 2) * H;
  CompensatedSum acc;
  for (std::size_t h = 1; h <= H; ++h) {
    prod.resize(child_len);
    for (std::size_t n = 0; n < child_len; ++n) prod[n] = a[n] * a[n + h];
    acc.add(seminorm_pow(prod, level - 1, N, H, scratch, depth + 1));
  }
  return acc.value() / static_cast<double>(H);
}

}  // namespace detail

/// Finite-sample seminorm recursion on an orbit window.
inline SeminormEstimate seminorm_recursive(const OrbitSample& sample, int level, std::size_t N,
                                           std::size_t H) {
  if (level < 1) throw std::invalid_argument("seminorm_recursive: level must be >= 1");
  if (level > 8) throw std::invalid_argument("seminorm_recursive: level too large");
  if (N < 1 || H < 1) throw std::invalid_argument("seminorm_recursive: need N >= 1, H >= 1");
  const std::size_t need = N + static_cast<std::size_t>(level - 1) * H;
  if (sample.values.size() < need) {
    throw std::invalid_argument("seminorm_recursive: orbit shorter than N + (k-1)H");
  }
  std::vector<std::vector<double>> scratch(static_cast<std::size_t>(level));
  const double pow_val = detail::seminorm_pow(sample.values, level, N, H, scratch, 0);
  SeminormEstimate est;
  // The h-averages of even powers are nonnegative up to rounding; clamp the
  // stray negative ulp before taking the root.
  const double clamped = std::max(0.0, pow_val);
  est.value = level == 1 ? std::sqrt(clamped)
                         : std::pow(clamped, 1.0 / static_cast<double>(1ull << level));
  est.level = level;
  est.N = N;
  est.H = H;
  est.method = "recursive";
  return est;
}

/// Exact Gowers box average on Z_p by direct enumeration:
///   E_{x, h_1..h_k in Z_p} prod_{eps subset of {1..k}} f(x + sum_{i in eps} h_i),
/// then the 2^k-th root.  Deliberately not implemented via the recursion so
/// it stays an independent oracle.
inline SeminormEstimate box_norm_cyclic(std::span<const double> table, int level) {
  if (level < 1) throw std::invalid_argument("box_norm_cyclic: level must be >= 1");
  const std::size_t p = table.size();
  if (p < 1) throw std::invalid_argument("box_norm_cyclic: empty table");
  const double cost = std::pow(static_cast<double>(p), level + 1);
  if (cost > static_cast<double>(1u << 26)) {
    throw std::length_error("box_norm_cyclic: p^{k+1} exceeds the cost guard");
  }
  // Extended table avoids modular reduction in the inner loops.
  std::vector<double> ext(p * static_cast<std::size_t>(level + 1));
  for (std::size_t i = 0; i < ext.size(); ++i) ext[i] = table[i % p];
  const std::size_t masks = std::size_t{1} << level;
  std::vector<std::size_t> subset_sum(masks, 0);
  std::vector<std::size_t> h(level, 0);
  CompensatedSum acc;
  while (true) {
    for (std::size_t m = 1; m < masks; ++m) {
      const int low = std::countr_zero(m);
      subset_sum[m] = subset_sum[m & (m - 1)] + h[static_cast<std::size_t>(low)];
    }
    for (std::size_t x = 0; x < p; ++x) {
      double prod = ext[x];
      for (std::size_t m = 1; m < masks; ++m) prod *= ext[x + subset_sum[m]];
      acc.add(prod);
    }
    int pos = level - 1;
    while (pos >= 0 && ++h[static_cast<std::size_t>(pos)] == p) h[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  const double mean = acc.value() / cost;
  SeminormEstimate est;
  est.value = std::pow(std::max(0.0, mean), 1.0 / static_cast<double>(1ull << level));
  est.level = level;
  est.N = p;
  est.H = p;
  est.method = "cyclic_box";
  return est;
}

/// Independent level-2 oracle: (sum_xi |fhat(xi)|^4)^{1/4} with
/// fhat(xi) = (1/p) sum_x f(x) e(-x xi / p).
inline SeminormEstimate u2_fourier(std::span<const double> table) {
  const std::size_t p = table.size();
  if (p < 1) throw std::invalid_argument("u2_fourier: empty table");
  std::vector<fft::Complex> a(p);
  for (std::size_t x = 0; x < p; ++x) a[x] = fft::Complex{table[x], 0.0};
  fft::forward(a);
  const double inv_p = 1.0 / static_cast<double>(p);
  CompensatedSum acc;
  for (const auto& z : a) {
    const double mag2 = std::norm(z * inv_p);
    acc.add(mag2 * mag2);
  }
  SeminormEstimate est;
  est.value = std::pow(acc.value(), 0.25);
  est.level = 2;
  est.N = p;
  est.H = 0;
  est.method = "fourier_u2";
  return est;
}

/// One recursive estimate per (N, H) pair; N must be strictly increasing.
inline std::vector<SeminormEstimate> seminorm_trace(
    const OrbitSample& sample, int level,
    const std::vector<std::pair<std::size_t, std::size_t>>& schedule) {
  if (schedule.empty()) throw std::invalid_argument("seminorm_trace: empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i].first <= schedule[i - 1].first) {
      throw std::invalid_argument("seminorm_trace: window sizes must increase");
    }
  }
  std::vector<SeminormEstimate> out;
  out.reserve(schedule.size());
  for (const auto& [N, H] : schedule) {
    out.push_back(seminorm_recursive(sample, level, N, H));
  }
  return out;
}

}  // namespace cubelab
