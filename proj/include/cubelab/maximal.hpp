// Wiener-Wintner maximal functions at finite N with certified bounds.
//
// The supremum over t in [0,1) of |(1/N) sum_n a_n e^{2 pi i n t}| is
// bracketed by a grid evaluation (zero-padded DFT of length L*N, a valid
// lower bound) plus a Lipschitz certificate: the derivative in t is at most
// 2 pi N max|a_n|, the grid spacing is 1/(LN), so the sup exceeds the grid
// maximum by at most pi max|a_n| / L.
//
// The DFT uses e^{-2 pi i n t}; since j <-> LN - j maps one sign convention
// onto the other, the set of moduli over the grid is the same either way.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cubelab/common.hpp"
#include "cubelab/fft.hpp"

namespace cubelab {

struct MaxBound {
  double grid_max = 0.0;        // valid lower bound for the supremum
  double certified_upper = 0.0; // valid upper bound
  std::size_t oversample = 1;   // grid resolution factor L
  std::size_t n = 0;            // window length N
};

namespace detail {

inline MaxBound max_bound_from_grid(double grid_max, double max_abs, std::size_t L,
                                    std::size_t N) {
  MaxBound b;
  b.grid_max = grid_max;
  b.certified_upper = grid_max + kPi * max_abs / static_cast<double>(L);
  b.oversample = L;
  b.n = N;
  return b;
}

}  // namespace detail

inline MaxBound ww_max(std::span<const std::complex<double>> a, std::size_t L) {
  const std::size_t N = a.size();
  if (N == 0) throw std::invalid_argument("ww_max: empty sequence");
  if (L == 0) throw std::invalid_argument("ww_max: oversample factor must be >= 1");
  const std::size_t M = L * N;
  std::vector<fft::Complex> buf(M, fft::Complex{0.0, 0.0});
  double max_abs = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    buf[n] = a[n];
    max_abs = std::max(max_abs, std::abs(a[n]));
  }
  fft::forward(buf);
  double peak = 0.0;
  for (const auto& z : buf) peak = std::max(peak, std::norm(z));
  const double grid_max = std::sqrt(peak) / static_cast<double>(N);
  return detail::max_bound_from_grid(grid_max, max_abs, L, N);
}

inline MaxBound ww_max(std::span<const double> a, std::size_t L) {
  std::vector<std::complex<double>> z(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) z[n] = std::complex<double>{a[n], 0.0};
  return ww_max(std::span<const std::complex<double>>(z), L);
}

/// Entry n bounds sup_t |(1/N) sum_m b_m c_{n+m} e^{2 pi i m t}|.
///
/// Rows are processed in fixed pairs (2r, 2r+1) packed into one complex
/// transform, halving the FFT count; the pairing does not depend on the
/// thread count, so results are bit-identical across --threads settings.
inline std::vector<MaxBound> twisted_profile_max(std::span<const double> b,
                                                 std::span<const double> c, std::size_t N,
                                                 std::size_t L, unsigned threads = 1) {
  if (N == 0) throw std::invalid_argument("twisted_profile_max: N must be >= 1");
  if (L == 0) throw std::invalid_argument("twisted_profile_max: oversample must be >= 1");
  if (b.size() < N || c.size() < 2 * N - 1) {
    throw std::invalid_argument("twisted_profile_max: sequences too short for window");
  }
  const std::size_t M = L * N;
  std::vector<MaxBound> out(N);
  const std::size_t pairs = (N + 1) / 2;
  parallel_for(pairs, threads, [&](std::size_t r) {
    thread_local std::vector<fft::Complex> buf;
    const std::size_t n0 = 2 * r;
    const std::size_t n1 = n0 + 1;
    const bool has_second = n1 < N;
    buf.assign(M, fft::Complex{0.0, 0.0});
    double max0 = 0.0, max1 = 0.0;
    for (std::size_t m = 0; m < N; ++m) {
      const double row0 = b[m] * c[n0 + m];
      const double row1 = has_second ? b[m] * c[n1 + m] : 0.0;
      buf[m] = fft::Complex{row0, row1};
      max0 = std::max(max0, std::abs(row0));
      max1 = std::max(max1, std::abs(row1));
    }
    fft::forward(buf);
    double peak0 = 0.0, peak1 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const fft::Complex zj = buf[j];
      const fft::Complex zr = std::conj(buf[j == 0 ? 0 : M - j]);
      peak0 = std::max(peak0, std::norm(0.5 * (zj + zr)));
      peak1 = std::max(peak1, std::norm(fft::Complex{0.0, -0.5} * (zj - zr)));
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    out[n0] = detail::max_bound_from_grid(std::sqrt(peak0) * inv_n, max0, L, N);
    if (has_second) {
      out[n1] = detail::max_bound_from_grid(std::sqrt(peak1) * inv_n, max1, L, N);
    }
  });
  return out;
}

/// (1/N) sum_n certified_upper_n^2: a valid finite-N upper bound for the
/// n-averaged squared maximal function.
inline double ww_mean_square(std::span<const double> b, std::span<const double> c,
                             std::size_t N, std::size_t L, unsigned threads = 1) {
  const auto profile = twisted_profile_max(b, c, N, L, threads);
  CompensatedSum acc;
  for (const auto& mb : profile) acc.add(mb.certified_upper * mb.certified_upper);
  return acc.value() / static_cast<double>(N);
}

}  // namespace cubelab
