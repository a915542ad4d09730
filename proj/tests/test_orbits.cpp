#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "cubelab/orbits.hpp"

using namespace cubelab;

namespace {

Observable random_trig(std::mt19937_64& rng, int max_freq) {
  std::vector<TrigTerm> terms;
  terms.push_back({0, {uniform_pm1(rng), 0.0}});
  for (long f = 1; f <= max_freq; ++f) {
    const std::complex<double> a{uniform_pm1(rng), uniform_pm1(rng)};
    terms.push_back({f, a});
    terms.push_back({-f, std::conj(a)});
  }
  return Observable::trig_poly(terms);
}

}  // namespace

TEST_CASE("identity rotation holds the base value") {
  auto s = orbit(SystemSpec::rotation(0.0), Observable::cosine(1), {0.0, 0.0}, 4);
  for (double v : s.values) CHECK(v == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("cyclic table orbit is the periodic sequence") {
  auto s = orbit(SystemSpec::cyclic(2), Observable::table({1.0, -1.0}), {0.0, 0.0}, 4);
  CHECK(s.values == std::vector<double>{1.0, -1.0, 1.0, -1.0});
}

TEST_CASE("quarter-turn rotation hits the exact cosine values") {
  auto s = orbit(SystemSpec::rotation(0.25), Observable::cosine(1), {0.0, 0.0}, 4);
  REQUIRE(s.values.size() == 4);
  CHECK(s.values[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(s.values[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(s.values[2] == Catch::Approx(-1.0).margin(1e-12));
  CHECK(s.values[3] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("exact means come from closed forms") {
  auto two_plus_cos = Observable::trig_poly(
      {{0, {2.0, 0.0}}, {1, {0.5, 0.0}}, {-1, {0.5, 0.0}}});
  CHECK(exact_mean(SystemSpec::rotation(0.3), two_plus_cos) == Catch::Approx(2.0));
  CHECK(exact_mean(SystemSpec::cyclic(2), Observable::table({1.0, -1.0})) ==
        Catch::Approx(0.0).margin(1e-15));
  CHECK(exact_mean(SystemSpec::rotation(0.3),
                   Observable::interval_indicator(0.0, 1.0 / 3.0)) ==
        Catch::Approx(1.0 / 3.0));
  CHECK(exact_mean(SystemSpec::bernoulli(7, 4),
                   Observable::symbol_fn({1.0, 2.0, 3.0, 4.0})) == Catch::Approx(2.5));
}

TEST_CASE("birkhoff means of short explicit orbits") {
  auto c = orbit(SystemSpec::rotation(0.37), Observable::constant(0.75), {0.2, 0.0}, 8);
  CHECK(birkhoff_mean(c, 5) == Catch::Approx(0.75));
  auto alt = orbit(SystemSpec::cyclic(2), Observable::table({1.0, -1.0}), {0.0, 0.0}, 4);
  CHECK(birkhoff_mean(alt, 4) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("golden rotation equidistributes the cosine") {
  auto s = orbit(SystemSpec::rotation(kGoldenAlpha), Observable::cosine(1), {0.0, 0.0}, 4096);
  const double m256 = std::abs(birkhoff_mean(s, 256));
  const double m1024 = std::abs(birkhoff_mean(s, 1024));
  const double m4096 = std::abs(birkhoff_mean(s, 4096));
  CHECK(m4096 < 1e-3);
  CHECK(m1024 < m256);
  CHECK(m4096 < m1024);
}

TEST_CASE("skew second coordinate matches direct iteration on dyadic data") {
  // alpha, x0, y0 dyadic, so plain double iteration below is exact.
  const double alpha = 0.5, x0 = 0.25, y0 = 0.125;
  auto s = orbit(SystemSpec::skew(alpha), Observable::cosine(1), {x0, y0}, 16);
  double x = x0, y = y0;
  for (std::size_t n = 0; n < 16; ++n) {
    CHECK(s.values[n] == Catch::Approx(std::cos(kTwoPi * y)).margin(1e-12));
    y = unit_frac(y + x);
    x = unit_frac(x + alpha);
  }
}

TEST_CASE("bernoulli orbits are reproducible and seed-sensitive") {
  auto obs = Observable::symbol_fn({-1.0, 1.0});
  auto a = orbit(SystemSpec::bernoulli(42, 2), obs, {0.0, 0.0}, 512);
  auto b = orbit(SystemSpec::bernoulli(42, 2), obs, {0.0, 0.0}, 512);
  auto c = orbit(SystemSpec::bernoulli(43, 2), obs, {0.0, 0.0}, 512);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("orbit values respect the stored sup bound") {
  auto rng = seeded_rng(9001);
  for (int trial = 0; trial < 20; ++trial) {
    auto obs = random_trig(rng, 5);
    auto s = orbit(SystemSpec::rotation(uniform_unit(rng)), obs,
                   {uniform_unit(rng), 0.0}, 257);
    for (double v : s.values) CHECK(std::abs(v) <= obs.sup_bound());
  }
}

TEST_CASE("cyclic orbits are p-periodic") {
  for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull}) {
    std::vector<double> tab(p);
    auto rng = seeded_rng(100 + p);
    for (auto& v : tab) v = uniform_pm1(rng);
    auto s = orbit(SystemSpec::cyclic(p), Observable::table(tab), {1.0, 0.0}, 4 * p);
    for (std::size_t n = 0; n + p < s.values.size(); ++n) {
      CHECK(s.values[n + p] == s.values[n]);
    }
  }
}

TEST_CASE("rotation orbits are reproducible bit for bit") {
  auto obs = Observable::cosine(3);
  auto a = orbit(SystemSpec::rotation(kGoldenAlpha), obs, {0.31, 0.0}, 1000);
  auto b = orbit(SystemSpec::rotation(kGoldenAlpha), obs, {0.31, 0.0}, 1000);
  CHECK(a.values == b.values);
}

TEST_CASE("invalid constructions are rejected") {
  CHECK_THROWS_AS(SystemSpec::rotation(1.0), std::invalid_argument);
  CHECK_THROWS_AS(SystemSpec::rotation(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(SystemSpec::cyclic(0), std::invalid_argument);
  CHECK_THROWS_AS(SystemSpec::bernoulli(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(Observable::interval_indicator(0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(Observable::interval_indicator(-0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(Observable::trig_poly({{1, {1.0, 0.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(Observable::table({}), std::invalid_argument);

  auto tab3 = Observable::table({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(orbit(SystemSpec::cyclic(2), tab3, {0.0, 0.0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(orbit(SystemSpec::rotation(0.1), tab3, {0.0, 0.0}, 4), std::invalid_argument);
  CHECK_THROWS_AS(
      orbit(SystemSpec::skew(0.1), Observable::interval_indicator(0.0, 0.5), {0.0, 0.0}, 4),
      std::invalid_argument);
  CHECK_THROWS_AS(orbit(SystemSpec::rotation(0.1), Observable::cosine(1), {0.0, 0.0}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(orbit(SystemSpec::cyclic(3), tab3, {0.5, 0.0}, 4), std::invalid_argument);

  auto s = orbit(SystemSpec::rotation(0.1), Observable::cosine(1), {0.0, 0.0}, 8);
  CHECK_THROWS_AS(birkhoff_mean(s, 0), std::invalid_argument);
  CHECK_THROWS_AS(birkhoff_mean(s, 9), std::invalid_argument);
}

TEST_CASE("trig coefficient symmetrization is exact") {
  // Slightly asymmetric inputs inside tolerance get folded to an exact pair.
  const std::complex<double> a{0.3, 0.4};
  const std::complex<double> almost = std::conj(a) + std::complex<double>{1e-14, -1e-14};
  auto obs = Observable::trig_poly({{2, a}, {-2, almost}});
  REQUIRE(obs.terms().size() == 2);
  const auto& pos = obs.terms()[0].freq == 2 ? obs.terms()[0] : obs.terms()[1];
  const auto& neg = obs.terms()[0].freq == -2 ? obs.terms()[0] : obs.terms()[1];
  CHECK(neg.amp == std::conj(pos.amp));
}
