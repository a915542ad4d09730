// Self-contained complex FFT: iterative radix-2 for power-of-two lengths,
// Bluestein's chirp-z fallback for everything else.  Twiddle tables are
// cached per length so repeated transforms of one size (the correlation
// kernels' hot path) pay no trig cost.

#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "cubelab/common.hpp"

namespace cubelab::fft {

using Complex = std::complex<double>;

inline bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

namespace detail {

struct Pow2Tables {
  std::vector<Complex> roots;       // e^{-2*pi*i*k/n}, k < n/2
  std::vector<std::size_t> bitrev;  // bit-reversal permutation
};

inline const Pow2Tables& pow2_tables(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<Pow2Tables>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    auto tab = std::make_unique<Pow2Tables>();
    tab->roots.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double ang = -kTwoPi * static_cast<double>(k) / static_cast<double>(n);
      tab->roots[k] = Complex{std::cos(ang), std::sin(ang)};
    }
    tab->bitrev.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      tab->bitrev[i] = r;
    }
    it = cache.emplace(n, std::move(tab)).first;
  }
  return *it->second;
}

}  // namespace detail

/// In-place forward transform, power-of-two length:
///   a[k] <- sum_n a[n] e^{-2*pi*i*n*k/N}.
inline void forward_pow2(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!is_pow2(n)) throw std::invalid_argument("forward_pow2: length not a power of two");
  const auto& tab = detail::pow2_tables(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = tab.bitrev[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      std::size_t tw = 0;
      for (std::size_t k = 0; k < half; ++k, tw += step) {
        const Complex w = tab.roots[tw];
        const Complex u = a[base + k];
        const Complex v = a[base + k + half] * w;
        a[base + k] = u + v;
        a[base + k + half] = u - v;
      }
    }
  }
}

inline void inverse_pow2(std::vector<Complex>& a) {
  for (auto& z : a) z = std::conj(z);
  forward_pow2(a);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& z : a) z = std::conj(z) * inv;
}

namespace detail {

struct ChirpTables {
  std::vector<Complex> chirp;         // e^{-pi*i*n^2/N}, n < N  (n^2 mod 2N)
  std::vector<Complex> kernel_freq;   // FFT of the symmetric inverse chirp
  std::size_t conv_len = 0;
};

inline const ChirpTables& chirp_tables(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<ChirpTables>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    auto tab = std::make_unique<ChirpTables>();
    tab->chirp.resize(n);
    const std::size_t period = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t sq = (k * k) % period;  // chirp phase is n^2-periodic mod 2N
      const double ang = -kPi * static_cast<double>(sq) / static_cast<double>(n);
      tab->chirp[k] = Complex{std::cos(ang), std::sin(ang)};
    }
    tab->conv_len = next_pow2(2 * n - 1);
    std::vector<Complex> kernel(tab->conv_len, Complex{0.0, 0.0});
    kernel[0] = std::conj(tab->chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel[k] = std::conj(tab->chirp[k]);
      kernel[tab->conv_len - k] = std::conj(tab->chirp[k]);
    }
    forward_pow2(kernel);
    tab->kernel_freq = std::move(kernel);
    it = cache.emplace(n, std::move(tab)).first;
  }
  return *it->second;
}

inline void forward_bluestein(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  const auto& tab = chirp_tables(n);
  std::vector<Complex> work(tab.conv_len, Complex{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) work[k] = a[k] * tab.chirp[k];
  forward_pow2(work);
  for (std::size_t k = 0; k < tab.conv_len; ++k) work[k] *= tab.kernel_freq[k];
  inverse_pow2(work);
  for (std::size_t k = 0; k < n; ++k) a[k] = work[k] * tab.chirp[k];
}

}  // namespace detail

/// Forward DFT of arbitrary length: a[k] <- sum_n a[n] e^{-2*pi*i*n*k/N}.
inline void forward(std::vector<Complex>& a) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) {
    forward_pow2(a);
  } else {
    detail::forward_bluestein(a);
  }
}

/// Inverse DFT (unitary up to the usual 1/N): forward(inverse(a)) == a.
inline void inverse(std::vector<Complex>& a) {
  if (a.size() <= 1) return;
  for (auto& z : a) z = std::conj(z);
  forward(a);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (auto& z : a) z = std::conj(z) * inv;
}

}  // namespace cubelab::fft
