// Concrete measure-preserving systems and observables with exactly known
// integrals.  Four families: circle rotation, skew product on the 2-torus,
// cyclic rotation on Z_p, and the Bernoulli shift over a finite alphabet.
// Everything downstream consumes only OrbitSample values.

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubelab/common.hpp"

namespace cubelab {

enum class SystemKind { Rotation, Skew, Cyclic, Bernoulli };

struct SystemSpec {
  SystemKind kind = SystemKind::Rotation;
  double alpha = 0.0;             // rotation, skew
  std::uint64_t modulus = 0;      // cyclic
  std::uint64_t seed = 0;         // bernoulli
  std::uint64_t alphabet_size = 0;

  static SystemSpec rotation(double alpha) {
    require_unit_parameter(alpha);
    SystemSpec s;
    s.kind = SystemKind::Rotation;
    s.alpha = alpha;
    return s;
  }

  // (x, y) -> (x + alpha, y + x) on the 2-torus; observables read the second
  // coordinate, whose orbit is the quadratic phase y0 + n x0 + alpha n(n-1)/2.
  static SystemSpec skew(double alpha) {
    require_unit_parameter(alpha);
    SystemSpec s;
    s.kind = SystemKind::Skew;
    s.alpha = alpha;
    return s;
  }

  static SystemSpec cyclic(std::uint64_t p) {
    if (p < 1) throw std::invalid_argument("cyclic: modulus must be >= 1");
    SystemSpec s;
    s.kind = SystemKind::Cyclic;
    s.modulus = p;
    return s;
  }

  static SystemSpec bernoulli(std::uint64_t seed, std::uint64_t alphabet) {
    if (alphabet < 2) throw std::invalid_argument("bernoulli: alphabet_size must be >= 2");
    SystemSpec s;
    s.kind = SystemKind::Bernoulli;
    s.seed = seed;
    s.alphabet_size = alphabet;
    return s;
  }

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;

  std::string describe() const {
    switch (kind) {
      case SystemKind::Rotation:
        return "rotation(alpha=" + to_shortest_string(alpha) + ")";
      case SystemKind::Skew:
        return "skew(alpha=" + to_shortest_string(alpha) + ")";
      case SystemKind::Cyclic:
        return "cyclic(p=" + std::to_string(modulus) + ")";
      case SystemKind::Bernoulli:
        return "bernoulli(seed=" + std::to_string(seed) +
               ",alphabet=" + std::to_string(alphabet_size) + ")";
    }
    return "unknown";
  }

 private:
  static void require_unit_parameter(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha >= 1.0) {
      throw std::invalid_argument("alpha must be finite and in [0,1)");
    }
  }
};

enum class ObservableKind { TrigPoly, IntervalIndicator, Table, SymbolFn };

struct TrigTerm {
  long freq = 0;
  std::complex<double> amp{0.0, 0.0};

  friend bool operator==(const TrigTerm&, const TrigTerm&) = default;
};

/// Real-valued observable.  Trig polynomials carry conjugate-symmetric
/// coefficients; tables and symbol functions are literal value lists.  Every
/// variant stores a sup-norm bound that dominates all sampled values and an
/// exact mean against the invariant measure.
class Observable {
 public:
  /// Conjugate symmetry (amp(-f) == conj(amp(f)), tolerance 1e-12) is
  /// required and then enforced exactly, so evaluations are real.
  static Observable trig_poly(const std::vector<TrigTerm>& raw_terms) {
    std::map<long, std::complex<double>> coef;
    for (const auto& t : raw_terms) coef[t.freq] += t.amp;
    for (const auto& [f, a] : coef) {
      const auto it = coef.find(-f);
      const std::complex<double> partner =
          it == coef.end() ? std::complex<double>{0.0, 0.0} : it->second;
      const double scale = std::max(1.0, std::abs(a));
      if (std::abs(partner - std::conj(a)) > 1e-12 * scale) {
        throw std::invalid_argument("trig_poly: coefficients are not conjugate-symmetric");
      }
    }
    Observable obs;
    obs.kind_ = ObservableKind::TrigPoly;
    CompensatedSum bound;
    CompensatedSum mean;
    for (const auto& [f, a] : coef) {
      if (f < 0) continue;
      if (f == 0) {
        const std::complex<double> a0{a.real(), 0.0};
        if (std::abs(a0) == 0.0) continue;
        obs.terms_.push_back({0, a0});
        bound.add(std::abs(a0));
        mean.add(a0.real());
        continue;
      }
      const auto it = coef.find(-f);
      const std::complex<double> neg =
          it == coef.end() ? std::complex<double>{0.0, 0.0} : it->second;
      const std::complex<double> sym = (a + std::conj(neg)) * 0.5;
      if (std::abs(sym) == 0.0) continue;
      obs.terms_.push_back({f, sym});
      obs.terms_.push_back({-f, std::conj(sym)});
      bound.add(2.0 * std::abs(sym));
    }
    // Headroom for evaluation round-off on top of the exact coefficient sum.
    obs.sup_bound_ = bound.value() * (1.0 + 1e-12);
    obs.mean_ = mean.value();
    return obs;
  }

  static Observable cosine(long freq) {
    return trig_poly({{freq, {0.5, 0.0}}, {-freq, {0.5, 0.0}}});
  }

  static Observable constant(double c) { return trig_poly({{0, {c, 0.0}}}); }

  /// Indicator of the half-open arc [a, b) in [0, 1].
  static Observable interval_indicator(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b > 1.0 || a >= b) {
      throw std::invalid_argument("interval_indicator: need 0 <= a < b <= 1");
    }
    Observable obs;
    obs.kind_ = ObservableKind::IntervalIndicator;
    obs.lo_ = a;
    obs.hi_ = b;
    obs.sup_bound_ = 1.0;
    obs.mean_ = b - a;
    return obs;
  }

  /// Value table for cyclic{p}; values.size() must equal p at pairing time.
  static Observable table(std::vector<double> values) {
    return from_values(ObservableKind::Table, std::move(values), "table");
  }

  /// Per-symbol values for bernoulli; reads the symbol at position 0.
  static Observable symbol_fn(std::vector<double> values) {
    return from_values(ObservableKind::SymbolFn, std::move(values), "symbol_fn");
  }

  ObservableKind kind() const { return kind_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  const std::vector<double>& values() const { return values_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  double sup_bound() const { return sup_bound_; }

  /// Exact integral against the invariant measure (uniform in every family).
  double mean() const { return mean_; }

  long max_abs_freq() const {
    long m = 0;
    for (const auto& t : terms_) m = std::max(m, std::labs(t.freq));
    return m;
  }

  /// Pointwise value for the circle variants; x is reduced mod 1 first.
  double eval_circle(double x) const {
    const double u = unit_frac(x);
    if (kind_ == ObservableKind::IntervalIndicator) {
      return (u >= lo_ && u < hi_) ? 1.0 : 0.0;
    }
    if (kind_ != ObservableKind::TrigPoly) {
      throw std::logic_error("eval_circle: observable is not circle-valued");
    }
    CompensatedSum acc;
    for (const auto& t : terms_) {
      if (t.freq == 0) {
        acc.add(t.amp.real());
        continue;
      }
      if (t.freq < 0) continue;  // folded into the conjugate pair below
      const double ang = kTwoPi * unit_frac(static_cast<double>(t.freq) * u);
      acc.add(2.0 * (t.amp.real() * std::cos(ang) - t.amp.imag() * std::sin(ang)));
    }
    return acc.value();
  }

  double eval_index(std::uint64_t i) const {
    if (kind_ != ObservableKind::Table && kind_ != ObservableKind::SymbolFn) {
      throw std::logic_error("eval_index: observable is not index-valued");
    }
    return values_.at(i);
  }

  friend bool operator==(const Observable&, const Observable&) = default;

 private:
  static Observable from_values(ObservableKind kind, std::vector<double> values,
                                const char* what) {
    if (values.empty()) throw std::invalid_argument(std::string(what) + ": empty value list");
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    }
    Observable obs;
    obs.kind_ = kind;
    obs.sup_bound_ = 0.0;
    for (double v : values) obs.sup_bound_ = std::max(obs.sup_bound_, std::abs(v));
    obs.mean_ = compensated_mean(values);
    obs.values_ = std::move(values);
    return obs;
  }

  ObservableKind kind_ = ObservableKind::TrigPoly;
  std::vector<TrigTerm> terms_;
  std::vector<double> values_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double sup_bound_ = 0.0;
  double mean_ = 0.0;
};

/// Starting point.  Rotation uses x; skew uses (x, y); cyclic uses x as an
/// integer residue; bernoulli ignores it (the seed fixes the point).
struct BasePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const BasePoint&, const BasePoint&) = default;
};

struct OrbitSample {
  std::vector<double> values;
  SystemSpec system;
  Observable observable;
  BasePoint base;

  std::size_t length() const { return values.size(); }
};

inline void require_compatible(const SystemSpec& spec, const Observable& obs) {
  switch (spec.kind) {
    case SystemKind::Rotation:
      if (obs.kind() != ObservableKind::TrigPoly &&
          obs.kind() != ObservableKind::IntervalIndicator) {
        throw std::invalid_argument("rotation systems take trig_poly or interval_indicator");
      }
      return;
    case SystemKind::Skew:
      if (obs.kind() != ObservableKind::TrigPoly) {
        throw std::invalid_argument("skew systems take trig_poly (on the second coordinate)");
      }
      return;
    case SystemKind::Cyclic:
      if (obs.kind() != ObservableKind::Table || obs.values().size() != spec.modulus) {
        throw std::invalid_argument("cyclic{p} systems take a table of exactly p values");
      }
      return;
    case SystemKind::Bernoulli:
      if (obs.kind() != ObservableKind::SymbolFn ||
          obs.values().size() != spec.alphabet_size) {
        throw std::invalid_argument("bernoulli systems take a symbol_fn of alphabet_size values");
      }
      return;
  }
  throw std::invalid_argument("unknown system kind");
}

/// Deterministic i.i.d. uniform symbol stream for the Bernoulli shift.
inline std::vector<std::uint32_t> bernoulli_symbols(std::uint64_t seed, std::uint64_t alphabet,
                                                    std::size_t n) {
  auto rng = seeded_rng(seed);
  std::vector<std::uint32_t> out(n);
  for (auto& s : out) s = static_cast<std::uint32_t>(uniform_index(rng, alphabet));
  return out;
}

/// values[n] = f(T^n x0) for n = 0..length-1.
inline OrbitSample orbit(const SystemSpec& spec, const Observable& obs, const BasePoint& base,
                         std::size_t length) {
  if (length < 1) throw std::invalid_argument("orbit: length must be >= 1");
  require_compatible(spec, obs);
  if (!std::isfinite(base.x) || !std::isfinite(base.y)) {
    throw std::invalid_argument("orbit: non-finite base point");
  }
  OrbitSample sample;
  sample.system = spec;
  sample.observable = obs;
  sample.base = base;
  sample.values.resize(length);
  switch (spec.kind) {
    case SystemKind::Rotation: {
      const double x0 = unit_frac(base.x);
      for (std::size_t n = 0; n < length; ++n) {
        sample.values[n] = obs.eval_circle(rotation_point(x0, n, spec.alpha));
      }
      break;
    }
    case SystemKind::Skew: {
      const double x0 = unit_frac(base.x);
      const double y0 = unit_frac(base.y);
      for (std::size_t n = 0; n < length; ++n) {
        sample.values[n] = obs.eval_circle(skew_second_coordinate(x0, y0, n, spec.alpha));
      }
      break;
    }
    case SystemKind::Cyclic: {
      const double xr = std::round(base.x);
      if (std::abs(base.x - xr) > 0.0 || xr < 0.0 ||
          xr >= static_cast<double>(spec.modulus)) {
        throw std::invalid_argument("orbit: cyclic base point must be an integer in [0,p)");
      }
      const std::uint64_t x0 = static_cast<std::uint64_t>(xr);
      for (std::size_t n = 0; n < length; ++n) {
        sample.values[n] = obs.eval_index((x0 + n) % spec.modulus);
      }
      break;
    }
    case SystemKind::Bernoulli: {
      const auto symbols = bernoulli_symbols(spec.seed, spec.alphabet_size, length);
      for (std::size_t n = 0; n < length; ++n) {
        sample.values[n] = obs.eval_index(symbols[n]);
      }
      break;
    }
  }
  return sample;
}

/// Closed-form integral of obs against the invariant measure of spec.
inline double exact_mean(const SystemSpec& spec, const Observable& obs) {
  require_compatible(spec, obs);
  return obs.mean();
}

/// (1/N) sum_{n<N} values[n].
inline double birkhoff_mean(const OrbitSample& sample, std::size_t N) {
  if (N == 0 || N > sample.values.size()) {
    throw std::invalid_argument("birkhoff_mean: need 1 <= N <= orbit length");
  }
  CompensatedSum acc;
  for (std::size_t n = 0; n < N; ++n) acc.add(sample.values[n]);
  return acc.value() / static_cast<double>(N);
}

}  // namespace cubelab
