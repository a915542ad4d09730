#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "cubelab/maximal.hpp"
#include "cubelab/orbits.hpp"
#include "cubelab/seminorms.hpp"

using namespace cubelab;

namespace {

/// Direct evaluation of sup_t |(1/N) sum a_n e^{2 pi i n t}| on a dense grid
/// of points t = j / points.  Includes the coarse grid when points is a
/// multiple of L*N.
double dense_sup(std::span<const std::complex<double>> a, std::size_t points) {
  const std::size_t N = a.size();
  double best = 0.0;
  for (std::size_t j = 0; j < points; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(points);
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < N; ++n) {
      const double ang = kTwoPi * unit_frac(static_cast<double>(n) * t);
      acc += a[n] * std::complex<double>{std::cos(ang), std::sin(ang)};
    }
    best = std::max(best, std::abs(acc) / static_cast<double>(N));
  }
  return best;
}

std::vector<std::complex<double>> to_complex(std::span<const double> a) {
  std::vector<std::complex<double>> z(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) z[i] = {a[i], 0.0};
  return z;
}

std::vector<double> random_pm1(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform_index(rng, 2) ? 1.0 : -1.0;
  return v;
}

}  // namespace

TEST_CASE("constant sequence peaks at t = 0") {
  for (std::size_t N : {1u, 5u, 16u}) {
    for (std::size_t L : {1u, 3u, 8u}) {
      std::vector<double> a(N, 1.0);
      auto b = ww_max(std::span<const double>(a), L);
      INFO("N = " << N << " L = " << L);
      CHECK(b.grid_max == Catch::Approx(1.0).margin(1e-12));
      CHECK(b.certified_upper <= 1.0 + kPi / static_cast<double>(L) + 1e-12);
    }
  }
}

TEST_CASE("quarter-frequency cosine has grid max one half") {
  std::vector<double> a(4);
  for (std::size_t n = 0; n < 4; ++n) a[n] = std::cos(kTwoPi * n / 4.0);
  auto b = ww_max(std::span<const double>(a), 4);
  CHECK(b.grid_max == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("certificate gap is exactly pi max|a| / L") {
  auto rng = seeded_rng(3);
  auto a = random_pm1(rng, 256);
  auto b = ww_max(std::span<const double>(a), 8);
  CHECK(b.certified_upper - b.grid_max == Catch::Approx(kPi / 8.0).margin(1e-15));
  CHECK(b.certified_upper - b.grid_max <= 0.3927);
}

TEST_CASE("dense reference grid lands inside the sandwich") {
  auto rng = seeded_rng(1234);
  for (std::size_t N : {4u, 7u, 16u}) {
    for (std::size_t L : {2u, 8u}) {
      std::vector<std::complex<double>> a(N);
      for (auto& z : a) z = {uniform_pm1(rng), uniform_pm1(rng)};
      auto b = ww_max(std::span<const std::complex<double>>(a), L);
      const double dense = dense_sup(a, 10 * L * N);
      INFO("N = " << N << " L = " << L);
      CHECK(dense >= b.grid_max - 1e-12);
      CHECK(dense <= b.certified_upper + 1e-12);
    }
  }
}

TEST_CASE("doubling the oversample tightens the bracket") {
  auto rng = seeded_rng(555);
  std::vector<double> a(33);
  for (auto& x : a) x = uniform_pm1(rng);
  auto lo = ww_max(std::span<const double>(a), 4);
  auto hi = ww_max(std::span<const double>(a), 8);
  CHECK(hi.grid_max >= lo.grid_max - 1e-15);
  CHECK(hi.certified_upper - hi.grid_max <=
        0.5 * (lo.certified_upper - lo.grid_max) + 1e-15);
}

TEST_CASE("pure on-grid phase attains grid max one") {
  const std::size_t N = 12, L = 4, j0 = 17;
  std::vector<std::complex<double>> a(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double ang = kTwoPi * static_cast<double>(n * j0 % (L * N)) /
                       static_cast<double>(L * N);
    a[n] = {std::cos(ang), std::sin(ang)};
  }
  auto b = ww_max(std::span<const std::complex<double>>(a), L);
  CHECK(b.grid_max == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("bounds are homogeneous under nonnegative scaling") {
  auto rng = seeded_rng(808);
  std::vector<double> a(20);
  for (auto& x : a) x = uniform_pm1(rng);
  std::vector<double> scaled(a);
  for (auto& x : scaled) x *= 2.5;
  auto b1 = ww_max(std::span<const double>(a), 4);
  auto b2 = ww_max(std::span<const double>(scaled), 4);
  CHECK(b2.grid_max == Catch::Approx(2.5 * b1.grid_max).margin(1e-12));
  CHECK(b2.certified_upper == Catch::Approx(2.5 * b1.certified_upper).margin(1e-12));
}

TEST_CASE("twisted profile of constants is flat") {
  std::vector<double> b(4, 1.0), c(7, 1.0);
  auto prof = twisted_profile_max(b, c, 4, 4);
  REQUIRE(prof.size() == 4);
  for (const auto& mb : prof) CHECK(mb.grid_max == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("twisted profile with N = 1 is the absolute product") {
  std::vector<double> b{-0.7}, c{0.4};
  auto prof = twisted_profile_max(b, c, 1, 8);
  REQUIRE(prof.size() == 1);
  CHECK(prof[0].grid_max == Catch::Approx(0.28).margin(1e-14));
}

TEST_CASE("twisted profile entries match per-row ww_max") {
  auto rng = seeded_rng(2024);
  for (std::size_t N : {5u, 8u}) {  // odd N exercises the unpaired tail row
    std::vector<double> b(N), c(2 * N - 1);
    for (auto& x : b) x = uniform_pm1(rng);
    for (auto& x : c) x = uniform_pm1(rng);
    auto prof = twisted_profile_max(b, c, N, 4);
    for (std::size_t n = 0; n < N; ++n) {
      std::vector<double> row(N);
      for (std::size_t m = 0; m < N; ++m) row[m] = b[m] * c[n + m];
      auto want = ww_max(std::span<const double>(row), 4);
      INFO("N = " << N << " n = " << n);
      CHECK(prof[n].grid_max == Catch::Approx(want.grid_max).margin(1e-12));
      CHECK(prof[n].certified_upper ==
            Catch::Approx(want.certified_upper).margin(1e-12));
    }
  }
}

TEST_CASE("twisted profile brackets a dense t-grid oracle") {
  auto tab_b = orbit(SystemSpec::cyclic(2), Observable::table({1.0, -0.5}), {0.0, 0.0}, 4);
  auto tab_c = orbit(SystemSpec::cyclic(2), Observable::table({0.8, -1.0}), {1.0, 0.0}, 7);
  auto prof = twisted_profile_max(tab_b.values, tab_c.values, 4, 4);
  for (std::size_t n = 0; n < 4; ++n) {
    std::vector<double> row(4);
    for (std::size_t m = 0; m < 4; ++m) row[m] = tab_b.values[m] * tab_c.values[n + m];
    const double dense = dense_sup(to_complex(row), 10000);
    CHECK(dense >= prof[n].grid_max - 1e-12);
    CHECK(dense <= prof[n].certified_upper + 1e-12);
    CHECK(dense - prof[n].grid_max <= kPi / 4.0);
  }
}

TEST_CASE("twisted profile is thread-count invariant") {
  auto rng = seeded_rng(99);
  std::vector<double> b(64), c(127);
  for (auto& x : b) x = uniform_pm1(rng);
  for (auto& x : c) x = uniform_pm1(rng);
  auto p1 = twisted_profile_max(b, c, 64, 4, 1);
  auto p3 = twisted_profile_max(b, c, 64, 4, 3);
  REQUIRE(p1.size() == p3.size());
  for (std::size_t n = 0; n < p1.size(); ++n) {
    CHECK(p1[n].grid_max == p3[n].grid_max);                  // bitwise
    CHECK(p1[n].certified_upper == p3[n].certified_upper);
  }
}

TEST_CASE("mean square of constants brackets one") {
  std::vector<double> b(8, 1.0), c(15, 1.0);
  const double ms = ww_mean_square(b, c, 8, 8);
  CHECK(ms >= 1.0);
  CHECK(ms <= (1.0 + kPi / 8.0) * (1.0 + kPi / 8.0) + 1e-12);
}

TEST_CASE("mean-zero bernoulli twisted mean square decays") {
  auto b = orbit(SystemSpec::bernoulli(11, 2), Observable::symbol_fn({1.0, -1.0}), {0.0, 0.0},
                 4096);
  std::vector<double> ones(2 * 4096 - 1, 1.0);
  CHECK(ww_mean_square(b.values, ones, 4096, 8) <= 0.2);
}

TEST_CASE("rotation eigen-pair mean square dominates the seminorm benchmark") {
  auto r = orbit(SystemSpec::rotation(kGoldenAlpha), Observable::cosine(1), {0.0, 0.0},
                 2 * 4096 - 1);
  const double lhs =
      ww_mean_square(std::span<const double>(r.values).first(4096), r.values, 4096, 8);
  auto sem = seminorm_recursive(
      orbit(SystemSpec::rotation(kGoldenAlpha), Observable::cosine(1), {0.0, 0.0}, 4096 + 2 * 64),
      3, 4096, 64);
  CHECK(lhs >= 0.2 * sem.value * sem.value);
}

TEST_CASE("maximal validation errors") {
  std::vector<double> a;
  CHECK_THROWS_AS(ww_max(std::span<const double>(a), 4), std::invalid_argument);
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(ww_max(std::span<const double>(one), 0), std::invalid_argument);
  std::vector<double> b(4, 1.0), c(6, 1.0);
  CHECK_THROWS_AS(twisted_profile_max(b, c, 4, 4), std::invalid_argument);
}
