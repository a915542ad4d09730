// Shared numeric utilities: compensated summation, torus arithmetic in
// extended precision, deterministic parallel loops, and RNG helpers.
//
// Reproducibility contract for the whole library: identical inputs produce
// bit-identical outputs, independent of thread count.  Parallel loops write
// to disjoint slots and every reduction runs sequentially in index order.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cubelab {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;
inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Golden-ratio frequency (sqrt(5)-1)/2, the default badly approximable
/// rotation number used throughout the experiments.
inline constexpr double kGoldenAlpha = 0.61803398874989484820458683436563812;

// ---------------------------------------------------------------------------
// Compensated (Kahan-Babuska/Neumaier) summation.
// ---------------------------------------------------------------------------

class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline double compensated_mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("compensated_mean: empty input");
  return compensated_sum(xs) / static_cast<double>(xs.size());
}

// ---------------------------------------------------------------------------
// Torus arithmetic.  Fractional parts are computed so that n*alpha is split
// into an exact product (via fma) plus residual; without this, phases drift
// by ~n ulp and pollute equidistribution at n ~ 2^20.
// ---------------------------------------------------------------------------

/// Wraps x into [0, 1).  Handles the rounding case where x - floor(x)
/// evaluates to exactly 1.0 for tiny negative x.
inline double unit_frac(double x) noexcept {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;
  if (f < 0.0) f += 1.0;
  return f;
}

namespace detail {

struct TwoFold {
  double hi;
  double lo;
};

inline TwoFold two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline TwoFold two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

/// frac(hi + lo) for a double-double value with |lo| << 1.
inline double frac_twofold(double hi, double lo) noexcept {
  const double f = hi - std::floor(hi);  // exact: fractional part of a double
  return unit_frac(f + lo);
}

}  // namespace detail

/// n-th point of the circle rotation x0 + n*alpha (mod 1), with the product
/// n*alpha carried in double-double precision.
inline double rotation_point(double x0, std::int64_t n, double alpha) noexcept {
  const auto p = detail::two_prod(static_cast<double>(n), alpha);
  const auto s = detail::two_sum(x0, p.hi);
  return detail::frac_twofold(s.hi, s.lo + p.lo);
}

/// Second coordinate of the n-th point of the skew product
/// (x, y) -> (x + alpha, y + x) on the 2-torus:
///   y_n = y0 + n*x0 + alpha*n(n-1)/2  (mod 1).
/// n(n-1)/2 stays exactly representable for n <= 2^26.
inline double skew_second_coordinate(double x0, double y0, std::int64_t n,
                                     double alpha) noexcept {
  const double tri = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const auto p1 = detail::two_prod(static_cast<double>(n), x0);
  const auto p2 = detail::two_prod(tri, alpha);
  const auto s1 = detail::two_sum(p1.hi, p2.hi);
  const auto s2 = detail::two_sum(s1.hi, y0);
  return detail::frac_twofold(s2.hi, p1.lo + p2.lo + s1.lo + s2.lo);
}

// ---------------------------------------------------------------------------
// Deterministic parallelism.
// ---------------------------------------------------------------------------

inline unsigned resolve_threads(unsigned requested) noexcept {
  if (requested != 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// Runs f(i) for i in [0, n).  The body must only write to slots owned by
/// index i; results are then independent of the thread count.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  threads = resolve_threads(threads);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kGrain = 16;
  auto worker = [&]() {
    for (;;) {
      const std::size_t begin = next.fetch_add(kGrain);
      if (begin >= n) return;
      const std::size_t end = std::min(n, begin + kGrain);
      for (std::size_t i = begin; i < end; ++i) f(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (unsigned t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// RNG helpers.  mt19937_64 output is fully specified by the standard; the
// distributions below avoid std::uniform_*_distribution, whose streams are
// implementation-defined.
// ---------------------------------------------------------------------------

inline std::mt19937_64 seeded_rng(std::uint64_t seed) {
  return std::mt19937_64{seed};
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [-1, 1).
inline double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * uniform_unit(rng) - 1.0;
}

inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  return bound == 0 ? 0 : rng() % bound;
}

/// Shortest decimal string that round-trips the double.  Keeps CSV output
/// byte-identical across runs and thread counts.
inline std::string to_shortest_string(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), ptr);
}

}  // namespace cubelab
