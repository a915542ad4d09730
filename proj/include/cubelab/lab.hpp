// Experiment drivers: structured text configuration, convergence sweeps with
// limit oracles, and CSV persistence.
//
// Config format: flat key-value lines grouped into [experiment], [system],
// [base] and repeated [observable] sections.  emit_config produces the
// canonical form; parse_config(emit_config(c)) == c.
//
// CSV schema (fixed): tag,k,N,H,L,seed,value,oracle,gap,ratio,rigorous,pass
// with empty cells for non-applicable columns.  All numeric cells use
// shortest round-trip formatting, so output is byte-identical across thread
// counts.

#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cubelab/common.hpp"
#include "cubelab/cubes.hpp"
#include "cubelab/orbits.hpp"
#include "cubelab/verify.hpp"

namespace cubelab {

struct TracePoint {
  std::size_t N = 0;
  double value = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

/// Finite-N realization of one convergence experiment: cube averages over a
/// strictly increasing window schedule plus the applicable limit oracle.
struct ConvergenceTrace {
  std::string id;
  std::string system_desc;
  int k = 0;
  std::vector<TracePoint> points;
  std::optional<double> oracle_limit;
  std::optional<double> final_gap;  // |last value - oracle_limit|
  std::optional<std::uint64_t> seed;
  std::size_t H = 0;
  std::size_t L = 0;
};

struct ExperimentConfig {
  std::string id;
  int k = 2;
  SystemSpec system;
  std::vector<Observable> observables;  // one shared, or exactly 2^k - 1
  std::vector<std::size_t> schedule;
  std::size_t H = 0;
  std::size_t L = 8;
  std::vector<std::uint64_t> seeds;      // bernoulli instances
  std::vector<BasePoint> base_points;    // deterministic instances
  std::string out;

  bool operator==(const ExperimentConfig&) const = default;
};

inline void validate_config(const ExperimentConfig& cfg) {
  if (cfg.id.empty()) throw std::invalid_argument("config: id must be nonempty");
  if (cfg.id.find(',') != std::string::npos || cfg.id.find('\n') != std::string::npos) {
    throw std::invalid_argument("config: id must not contain ',' or newline");
  }
  if (cfg.k < 2 || cfg.k > 16) throw std::invalid_argument("config: k must be in [2, 16]");
  if (cfg.schedule.empty()) throw std::invalid_argument("config: empty schedule");
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    if (cfg.schedule[i] < 1 || (i > 0 && cfg.schedule[i] <= cfg.schedule[i - 1])) {
      throw std::invalid_argument("config: schedule must be strictly increasing and >= 1");
    }
  }
  const std::size_t count = (std::size_t{1} << cfg.k) - 1;
  if (cfg.observables.size() != 1 && cfg.observables.size() != count) {
    throw std::invalid_argument("config: need one shared observable or 2^k - 1");
  }
  for (const auto& obs : cfg.observables) require_compatible(cfg.system, obs);
}

/// The shared-observable shorthand expanded to all 2^k - 1 positions.
inline std::vector<Observable> expanded_observables(const ExperimentConfig& cfg) {
  const std::size_t count = (std::size_t{1} << cfg.k) - 1;
  if (cfg.observables.size() == count) return cfg.observables;
  return std::vector<Observable>(count, cfg.observables.front());
}

// ---------------------------------------------------------------------------
// Limit oracles.  Each is an independent route to the limit of the cube
// averages; none of them evaluates a cube average.

/// Weakly mixing limit: the product of the integrals.  Bernoulli only.
inline double product_of_integrals_oracle(std::span<const Observable> observables,
                                          std::span<const SystemSpec> systems) {
  if (observables.empty() || observables.size() != systems.size()) {
    throw std::invalid_argument("product_of_integrals_oracle: need matching nonempty lists");
  }
  double prod = 1.0;
  for (std::size_t i = 0; i < observables.size(); ++i) {
    if (systems[i].kind != SystemKind::Bernoulli) {
      throw std::invalid_argument(
          "product_of_integrals_oracle: system is not bernoulli (not weakly mixing)");
    }
    require_compatible(systems[i], observables[i]);
    prod *= exact_mean(systems[i], observables[i]);
  }
  return prod;
}

namespace detail {

/// Denominator-2^m rationals have periodic doubled orbits; they are rejected
/// as rotation angles wherever an equidistribution limit is claimed.
inline bool is_dyadic(double alpha, int max_log = 20) {
  double scaled = alpha;
  for (int m = 0; m <= max_log; ++m) {
    if (std::abs(scaled - std::round(scaled)) <= 1e-12) return true;
    scaled *= 2.0;
  }
  return false;
}

inline std::complex<double> trig_coefficient(const Observable& obs, long freq) {
  for (const auto& t : obs.terms()) {
    if (t.freq == freq) return t.amp;
  }
  return {0.0, 0.0};
}

inline void require_trig_group(std::span<const Observable> fs, int k, long max_degree) {
  if (k < 2 || k > 3) throw std::invalid_argument("rotation oracle: k must be 2 or 3");
  const std::size_t count = (std::size_t{1} << k) - 1;
  if (fs.size() != count) {
    throw std::invalid_argument("rotation oracle: need 2^k - 1 observables");
  }
  for (const auto& f : fs) {
    if (f.kind() != ObservableKind::TrigPoly) {
      throw std::invalid_argument("rotation oracle: observables must be trig polynomials");
    }
    if (f.max_abs_freq() > max_degree) {
      throw std::invalid_argument("rotation oracle: trig degree too large");
    }
  }
}

}  // namespace detail

/// Tensor-grid average of the cube product over the torus, grid offset x.
/// The rectangle rule is exact for trig polynomials as long as every
/// per-axis frequency of the integrand stays below points_per_axis, which
/// the degree precondition guarantees.
inline double rotation_quadrature_oracle(std::span<const Observable> fs, double x, int k,
                                         std::size_t points_per_axis) {
  detail::require_trig_group(fs, k, 63);
  long total_degree = 0;
  for (const auto& f : fs) total_degree += f.max_abs_freq();
  if (points_per_axis <= static_cast<std::size_t>(total_degree)) {
    throw std::invalid_argument("rotation_quadrature_oracle: grid coarser than bandwidth");
  }
  const std::size_t M = points_per_axis;
  std::vector<std::vector<double>> table(fs.size(), std::vector<double>(M));
  for (std::size_t j = 0; j < fs.size(); ++j) {
    for (std::size_t i = 0; i < M; ++i) {
      table[j][i] = fs[j].eval_circle(x + static_cast<double>(i) / static_cast<double>(M));
    }
  }
  CompensatedSum total;
  if (k == 2) {
    for (std::size_t s = 0; s < M; ++s) {
      CompensatedSum row;
      for (std::size_t t = 0; t < M; ++t) {
        row.add(table[0][s] * table[1][t] * table[2][(s + t) % M]);
      }
      total.add(row.value());
    }
    return total.value() / static_cast<double>(M * M);
  }
  for (std::size_t s = 0; s < M; ++s) {
    for (std::size_t t = 0; t < M; ++t) {
      const double pre = table[0][s] * table[1][t] * table[2][(s + t) % M];
      CompensatedSum row;
      for (std::size_t u = 0; u < M; ++u) {
        row.add(pre * table[3][u] * table[4][(s + u) % M] * table[5][(t + u) % M] *
                table[6][(s + t + u) % M]);
      }
      total.add(row.value());
    }
  }
  return total.value() / (static_cast<double>(M) * static_cast<double>(M) *
                          static_cast<double>(M));
}

/// Equidistribution limit of the cube average on an irrational rotation.
/// k=2 uses the closed Fourier form
///   sum_c f1^(-c) f2^(-c) f3^(c) e(-c x),
/// the only surviving terms of the double integral of
/// f1(x+s) f2(x+t) f3(x+s+t); k=3 uses the tensor-grid quadrature, exact
/// for the admitted degrees.  The limit does not depend on alpha; alpha is
/// validated to be a sound irrational surrogate (non-dyadic).
inline double rotation_limit_oracle(std::span<const Observable> fs, double alpha, double x,
                                    int k) {
  detail::require_trig_group(fs, k, 63);
  if (!std::isfinite(alpha) || alpha < 0.0 || alpha >= 1.0 || detail::is_dyadic(alpha)) {
    throw std::invalid_argument("rotation_limit_oracle: alpha must be non-dyadic in [0, 1)");
  }
  if (k == 3) return rotation_quadrature_oracle(fs, x, 3, 256);
  std::complex<double> sum{0.0, 0.0};
  for (const auto& term : fs[2].terms()) {
    const long c = term.freq;
    const std::complex<double> a1 = detail::trig_coefficient(fs[0], -c);
    if (a1 == std::complex<double>{0.0, 0.0}) continue;
    const std::complex<double> a2 = detail::trig_coefficient(fs[1], -c);
    if (a2 == std::complex<double>{0.0, 0.0}) continue;
    const double ang = -kTwoPi * unit_frac(static_cast<double>(c) * x);
    sum += a1 * a2 * term.amp * std::complex<double>{std::cos(ang), std::sin(ang)};
  }
  if (std::abs(sum.imag()) > 1e-9 * std::max(1.0, std::abs(sum.real()))) {
    throw std::logic_error("rotation_limit_oracle: limit has a non-real residue");
  }
  return sum.real();
}

/// Exact limit on cyclic{p}: the average of the cube product over (Z_p)^k.
/// Independent of the cube-average code paths; cube averages at window
/// sizes that are multiples of p reproduce it exactly.
inline double periodic_limit_oracle(std::span<const Observable> tables, int k,
                                    std::uint64_t x) {
  if (k < 2 || k > 16) throw std::invalid_argument("periodic_limit_oracle: k must be in [2, 16]");
  const std::size_t count = (std::size_t{1} << k) - 1;
  if (tables.size() != count) {
    throw std::invalid_argument("periodic_limit_oracle: need 2^k - 1 tables");
  }
  for (const auto& t : tables) {
    if (t.kind() != ObservableKind::Table) {
      throw std::invalid_argument("periodic_limit_oracle: observables must be tables");
    }
  }
  const std::size_t p = tables[0].values().size();
  for (const auto& t : tables) {
    if (t.values().size() != p) {
      throw std::invalid_argument("periodic_limit_oracle: tables must share one modulus");
    }
  }
  if (x >= p) throw std::invalid_argument("periodic_limit_oracle: x must be in [0, p)");
  double cells = 1.0;
  for (int i = 0; i < k; ++i) {
    cells *= static_cast<double>(p);
    if (cells > 1e6) throw std::length_error("periodic_limit_oracle: p^k exceeds 10^6");
  }
  std::vector<std::size_t> digit(static_cast<std::size_t>(k), 0);
  std::vector<std::uint64_t> sums(count + 1, 0);
  CompensatedSum total;
  while (true) {
    sums[0] = 0;
    for (std::size_t j = 1; j <= count; ++j) {
      sums[j] = sums[j & (j - 1)] +
                static_cast<std::uint64_t>(digit[static_cast<std::size_t>(std::countr_zero(j))]);
    }
    double prod = 1.0;
    for (std::size_t j = 1; j <= count; ++j) {
      prod *= tables[j - 1].values()[(x + sums[j]) % p];
    }
    total.add(prod);
    std::size_t pos = 0;
    while (pos < digit.size() && ++digit[pos] == p) digit[pos++] = 0;
    if (pos == digit.size()) break;
  }
  return total.value() / cells;
}

// ---------------------------------------------------------------------------
// Convergence sweep.

namespace detail {

struct SweepInstance {
  SystemSpec system;
  BasePoint base;
  std::optional<std::uint64_t> seed;
  std::string id;
};

inline std::vector<SweepInstance> sweep_instances(const ExperimentConfig& cfg) {
  std::vector<SweepInstance> out;
  if (cfg.system.kind == SystemKind::Bernoulli) {
    std::vector<std::uint64_t> seeds =
        cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.system.seed} : cfg.seeds;
    for (std::uint64_t s : seeds) {
      SweepInstance inst;
      inst.system = SystemSpec::bernoulli(s, cfg.system.alphabet_size);
      inst.seed = s;
      out.push_back(std::move(inst));
    }
  } else {
    std::vector<BasePoint> bases =
        cfg.base_points.empty() ? std::vector<BasePoint>{BasePoint{}} : cfg.base_points;
    for (const auto& b : bases) {
      SweepInstance inst;
      inst.system = cfg.system;
      inst.base = b;
      out.push_back(std::move(inst));
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = out.size() == 1 ? cfg.id : cfg.id + "#" + std::to_string(i);
  }
  return out;
}

inline std::optional<double> attach_oracle(const ExperimentConfig& cfg,
                                           const std::vector<Observable>& obs,
                                           const SweepInstance& inst) {
  switch (cfg.system.kind) {
    case SystemKind::Bernoulli: {
      std::vector<SystemSpec> systems(obs.size(), inst.system);
      return product_of_integrals_oracle(obs, systems);
    }
    case SystemKind::Cyclic: {
      const double p = static_cast<double>(cfg.system.modulus);
      if (std::pow(p, cfg.k) > 1e6) return std::nullopt;
      return periodic_limit_oracle(obs, cfg.k, static_cast<std::uint64_t>(inst.base.x));
    }
    case SystemKind::Rotation: {
      if (cfg.k != 2 && cfg.k != 3) return std::nullopt;
      if (detail::is_dyadic(cfg.system.alpha)) return std::nullopt;
      for (const auto& f : obs) {
        if (f.kind() != ObservableKind::TrigPoly || f.max_abs_freq() > 63) return std::nullopt;
      }
      return rotation_limit_oracle(obs, cfg.system.alpha, inst.base.x, cfg.k);
    }
    case SystemKind::Skew:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace detail

/// One trace per instance: per seed for bernoulli configs, per base point
/// otherwise.  Orbit length is k(N_max - 1) + 1.  Instances run in
/// parallel; trace assembly keeps config order, and values are independent
/// of the thread count.
inline std::vector<ConvergenceTrace> convergence_sweep(const ExperimentConfig& cfg,
                                                       unsigned threads = 1) {
  validate_config(cfg);
  const auto obs = expanded_observables(cfg);
  const auto instances = detail::sweep_instances(cfg);
  const std::size_t length =
      static_cast<std::size_t>(cfg.k) * (cfg.schedule.back() - 1) + 1;
  const unsigned outer = instances.size() > 1 ? threads : 1;
  const unsigned inner = instances.size() > 1 ? 1 : threads;
  std::vector<ConvergenceTrace> traces(instances.size());
  parallel_for(instances.size(), outer, [&](std::size_t i) {
    const auto& inst = instances[i];
    std::vector<OrbitSample> fs;
    fs.reserve(obs.size());
    for (const auto& o : obs) fs.push_back(orbit(inst.system, o, inst.base, length));
    ConvergenceTrace trace;
    trace.id = inst.id;
    trace.system_desc = inst.system.describe();
    trace.k = cfg.k;
    trace.seed = inst.seed;
    trace.H = cfg.H;
    trace.L = cfg.L;
    for (std::size_t N : cfg.schedule) {
      const CubeSpec spec(cfg.k, N, fs);
      trace.points.push_back({N, cube_average_fast(spec, inner).value});
    }
    trace.oracle_limit = detail::attach_oracle(cfg, obs, inst);
    if (trace.oracle_limit) {
      trace.final_gap = std::abs(trace.points.back().value - *trace.oracle_limit);
    }
    traces[i] = std::move(trace);
  });
  return traces;
}

// ---------------------------------------------------------------------------
// Config text format.

namespace detail {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct ConfigSection {
  std::string name;
  std::size_t line = 0;
  std::vector<ConfigEntry> entries;
};

[[noreturn]] inline void config_fail(std::size_t line, const std::string& msg) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + msg);
}

inline std::string trimmed(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<ConfigSection> config_sections(std::string_view text) {
  std::vector<ConfigSection> sections;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trimmed(raw);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) config_fail(line_no, "malformed section header");
      sections.push_back({line.substr(1, line.size() - 2), line_no, {}});
    } else {
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) config_fail(line_no, "expected 'key = value'");
      if (sections.empty()) config_fail(line_no, "key outside any section");
      ConfigEntry e;
      e.key = trimmed(std::string_view(line).substr(0, eq));
      e.value = trimmed(std::string_view(line).substr(eq + 1));
      e.line = line_no;
      if (e.key.empty()) config_fail(line_no, "empty key");
      sections.back().entries.push_back(std::move(e));
    }
    if (pos > text.size()) break;
  }
  return sections;
}

/// Entries of one section keyed by name; duplicate keys rejected.  take()
/// consumes; leftovers are reported as unknown keys.
struct SectionReader {
  explicit SectionReader(const ConfigSection& s) : name(s.name), line(s.line) {
    for (const auto& e : s.entries) {
      if (!entries.emplace(e.key, e).second) {
        config_fail(e.line, "duplicate key '" + e.key + "'");
      }
    }
  }

  std::optional<ConfigEntry> take(const std::string& key) {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    ConfigEntry e = it->second;
    entries.erase(it);
    return e;
  }

  ConfigEntry require(const std::string& key) {
    auto e = take(key);
    if (!e) config_fail(line, "missing key '" + key + "' in [" + name + "]");
    return *e;
  }

  void finish() const {
    if (entries.empty()) return;
    const auto& e = entries.begin()->second;
    config_fail(e.line, "unknown key '" + e.key + "' in [" + name + "]");
  }

  std::string name;
  std::size_t line;
  std::map<std::string, ConfigEntry> entries;
};

inline double entry_real(const ConfigEntry& e, std::string_view token) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    config_fail(e.line, "'" + e.key + "': bad number '" + std::string(token) + "'");
  }
  return v;
}

inline std::vector<std::string> entry_tokens(const ConfigEntry& e) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < e.value.size()) {
    while (i < e.value.size() && std::isspace(static_cast<unsigned char>(e.value[i]))) ++i;
    std::size_t j = i;
    while (j < e.value.size() && !std::isspace(static_cast<unsigned char>(e.value[j]))) ++j;
    if (j > i) out.push_back(e.value.substr(i, j - i));
    i = j;
  }
  if (out.empty()) config_fail(e.line, "'" + e.key + "': empty value");
  return out;
}

inline double single_real(const ConfigEntry& e) {
  const auto toks = entry_tokens(e);
  if (toks.size() != 1) config_fail(e.line, "'" + e.key + "': expected one number");
  return entry_real(e, toks[0]);
}

template <typename Int>
Int single_integer(const ConfigEntry& e) {
  const auto toks = entry_tokens(e);
  Int v{};
  const auto res = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), v);
  if (toks.size() != 1 || res.ec != std::errc{} || res.ptr != toks[0].data() + toks[0].size()) {
    config_fail(e.line, "'" + e.key + "': bad integer");
  }
  return v;
}

template <typename Int>
std::vector<Int> integer_list(const ConfigEntry& e) {
  std::vector<Int> out;
  for (const auto& tok : entry_tokens(e)) {
    Int v{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
      config_fail(e.line, "'" + e.key + "': bad integer '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<double> real_list(const ConfigEntry& e) {
  std::vector<double> out;
  for (const auto& tok : entry_tokens(e)) out.push_back(entry_real(e, tok));
  return out;
}

inline SystemSpec parse_system(SectionReader& r) {
  const auto kind = r.require("kind");
  SystemSpec spec;
  try {
    if (kind.value == "rotation") {
      spec = SystemSpec::rotation(single_real(r.require("alpha")));
    } else if (kind.value == "skew") {
      spec = SystemSpec::skew(single_real(r.require("alpha")));
    } else if (kind.value == "cyclic") {
      spec = SystemSpec::cyclic(single_integer<std::uint64_t>(r.require("p")));
    } else if (kind.value == "bernoulli") {
      spec = SystemSpec::bernoulli(single_integer<std::uint64_t>(r.require("seed")),
                                   single_integer<std::uint64_t>(r.require("alphabet")));
    } else {
      config_fail(kind.line, "unknown system kind '" + kind.value + "'");
    }
  } catch (const std::invalid_argument& err) {
    config_fail(kind.line, err.what());
  }
  r.finish();
  return spec;
}

inline Observable parse_observable(SectionReader& r) {
  const auto kind = r.require("kind");
  try {
    if (kind.value == "trig") {
      const auto freqs = integer_list<long>(r.require("freqs"));
      const auto re = real_list(r.require("re"));
      auto im_entry = r.take("im");
      std::vector<double> im =
          im_entry ? real_list(*im_entry) : std::vector<double>(freqs.size(), 0.0);
      if (re.size() != freqs.size() || im.size() != freqs.size()) {
        config_fail(kind.line, "trig: freqs, re, im must have equal length");
      }
      std::vector<TrigTerm> terms(freqs.size());
      for (std::size_t i = 0; i < freqs.size(); ++i) terms[i] = {freqs[i], {re[i], im[i]}};
      r.finish();
      return Observable::trig_poly(terms);
    }
    if (kind.value == "cosine") {
      const long freq = single_integer<long>(r.require("freq"));
      r.finish();
      return Observable::cosine(freq);
    }
    if (kind.value == "constant") {
      const double v = single_real(r.require("value"));
      r.finish();
      return Observable::constant(v);
    }
    if (kind.value == "indicator") {
      const double lo = single_real(r.require("lower"));
      const double hi = single_real(r.require("upper"));
      r.finish();
      return Observable::interval_indicator(lo, hi);
    }
    if (kind.value == "table") {
      auto values = real_list(r.require("values"));
      r.finish();
      return Observable::table(std::move(values));
    }
    if (kind.value == "symbols") {
      auto values = real_list(r.require("values"));
      r.finish();
      return Observable::symbol_fn(std::move(values));
    }
  } catch (const std::invalid_argument& err) {
    config_fail(kind.line, err.what());
  }
  config_fail(kind.line, "unknown observable kind '" + kind.value + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(std::string_view text) {
  const auto sections = detail::config_sections(text);
  ExperimentConfig cfg;
  bool saw_experiment = false, saw_system = false, saw_base = false;
  for (const auto& section : sections) {
    detail::SectionReader r(section);
    if (section.name == "experiment") {
      if (saw_experiment) detail::config_fail(section.line, "repeated [experiment] section");
      saw_experiment = true;
      cfg.id = r.require("id").value;
      cfg.k = detail::single_integer<int>(r.require("k"));
      cfg.schedule = detail::integer_list<std::size_t>(r.require("schedule"));
      if (auto e = r.take("h")) cfg.H = detail::single_integer<std::size_t>(*e);
      if (auto e = r.take("l")) cfg.L = detail::single_integer<std::size_t>(*e);
      if (auto e = r.take("seeds")) cfg.seeds = detail::integer_list<std::uint64_t>(*e);
      if (auto e = r.take("out")) cfg.out = e->value;
      r.finish();
    } else if (section.name == "system") {
      if (saw_system) detail::config_fail(section.line, "repeated [system] section");
      saw_system = true;
      cfg.system = detail::parse_system(r);
    } else if (section.name == "base") {
      if (saw_base) detail::config_fail(section.line, "repeated [base] section");
      saw_base = true;
      const auto xs = detail::real_list(r.require("x"));
      auto y_entry = r.take("y");
      const std::vector<double> ys =
          y_entry ? detail::real_list(*y_entry) : std::vector<double>(xs.size(), 0.0);
      if (ys.size() != xs.size()) {
        detail::config_fail(section.line, "base: x and y must have equal length");
      }
      for (std::size_t i = 0; i < xs.size(); ++i) cfg.base_points.push_back({xs[i], ys[i]});
      r.finish();
    } else if (section.name == "observable") {
      cfg.observables.push_back(detail::parse_observable(r));
    } else {
      detail::config_fail(section.line, "unknown section [" + section.name + "]");
    }
  }
  if (!saw_experiment) throw std::runtime_error("config line 1: missing [experiment] section");
  if (!saw_system) throw std::runtime_error("config line 1: missing [system] section");
  if (cfg.observables.empty()) {
    throw std::runtime_error("config line 1: missing [observable] section");
  }
  try {
    validate_config(cfg);
  } catch (const std::invalid_argument& err) {
    throw std::runtime_error(std::string("config line 1: ") + err.what());
  }
  return cfg;
}

inline std::string emit_config(const ExperimentConfig& cfg) {
  validate_config(cfg);
  std::string s;
  const auto list_u64 = [](const std::vector<std::uint64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out += ' ';
      out += std::to_string(v[i]);
    }
    return out;
  };
  s += "[experiment]\n";
  s += "id = " + cfg.id + "\n";
  s += "k = " + std::to_string(cfg.k) + "\n";
  s += "schedule =";
  for (std::size_t n : cfg.schedule) s += " " + std::to_string(n);
  s += "\n";
  s += "h = " + std::to_string(cfg.H) + "\n";
  s += "l = " + std::to_string(cfg.L) + "\n";
  if (!cfg.seeds.empty()) s += "seeds = " + list_u64(cfg.seeds) + "\n";
  if (!cfg.out.empty()) s += "out = " + cfg.out + "\n";

  s += "\n[system]\n";
  switch (cfg.system.kind) {
    case SystemKind::Rotation:
      s += "kind = rotation\nalpha = " + to_shortest_string(cfg.system.alpha) + "\n";
      break;
    case SystemKind::Skew:
      s += "kind = skew\nalpha = " + to_shortest_string(cfg.system.alpha) + "\n";
      break;
    case SystemKind::Cyclic:
      s += "kind = cyclic\np = " + std::to_string(cfg.system.modulus) + "\n";
      break;
    case SystemKind::Bernoulli:
      s += "kind = bernoulli\nseed = " + std::to_string(cfg.system.seed) +
           "\nalphabet = " + std::to_string(cfg.system.alphabet_size) + "\n";
      break;
  }

  if (!cfg.base_points.empty()) {
    s += "\n[base]\nx =";
    for (const auto& b : cfg.base_points) s += " " + to_shortest_string(b.x);
    s += "\ny =";
    for (const auto& b : cfg.base_points) s += " " + to_shortest_string(b.y);
    s += "\n";
  }

  for (const auto& obs : cfg.observables) {
    s += "\n[observable]\n";
    switch (obs.kind()) {
      case ObservableKind::TrigPoly: {
        s += "kind = trig\nfreqs =";
        for (const auto& t : obs.terms()) s += " " + std::to_string(t.freq);
        s += "\nre =";
        for (const auto& t : obs.terms()) s += " " + to_shortest_string(t.amp.real());
        s += "\nim =";
        for (const auto& t : obs.terms()) s += " " + to_shortest_string(t.amp.imag());
        s += "\n";
        break;
      }
      case ObservableKind::IntervalIndicator:
        s += "kind = indicator\nlower = " + to_shortest_string(obs.lower()) +
             "\nupper = " + to_shortest_string(obs.upper()) + "\n";
        break;
      case ObservableKind::Table:
      case ObservableKind::SymbolFn: {
        s += obs.kind() == ObservableKind::Table ? "kind = table\nvalues ="
                                                 : "kind = symbols\nvalues =";
        for (double v : obs.values()) s += " " + to_shortest_string(v);
        s += "\n";
        break;
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV persistence.

inline std::string csv_header() { return "tag,k,N,H,L,seed,value,oracle,gap,ratio,rigorous,pass"; }

namespace detail {

inline void append_csv_record(std::string& out, const std::string& tag, int k, std::size_t N,
                              std::size_t H, std::size_t L,
                              const std::optional<std::uint64_t>& seed, double value,
                              const std::optional<double>& oracle,
                              const std::optional<double>& ratio,
                              const std::optional<bool>& rigorous,
                              const std::optional<bool>& pass) {
  out += tag;
  out += ',';
  if (k > 0) out += std::to_string(k);
  out += ',';
  if (N > 0) out += std::to_string(N);
  out += ',';
  if (H > 0) out += std::to_string(H);
  out += ',';
  if (L > 0) out += std::to_string(L);
  out += ',';
  if (seed) out += std::to_string(*seed);
  out += ',';
  out += to_shortest_string(value);
  out += ',';
  if (oracle) out += to_shortest_string(*oracle);
  out += ',';
  if (oracle) out += to_shortest_string(std::abs(value - *oracle));
  out += ',';
  if (ratio) out += to_shortest_string(*ratio);
  out += ',';
  if (rigorous) out += *rigorous ? "true" : "false";
  out += ',';
  if (pass) out += *pass ? "true" : "false";
  out += '\n';
}

}  // namespace detail

inline void append_trace_rows(std::string& out, const ConvergenceTrace& trace) {
  for (const auto& point : trace.points) {
    detail::append_csv_record(out, trace.id, trace.k, point.N, trace.H, trace.L, trace.seed,
                              point.value, trace.oracle_limit, std::nullopt, std::nullopt,
                              std::nullopt);
  }
}

inline void append_report_row(std::string& out, const InequalityReport& report) {
  detail::append_csv_record(out, report.tag, report.params.k, report.params.N, report.params.H,
                            report.params.L, report.params.seed, report.lhs, report.rhs,
                            report.ratio, report.rigorous, report.holds);
}

/// Relative output names resolve against CUBELAB_OUT_DIR when it is set.
inline std::string resolve_out_path(const std::string& name) {
  if (name.empty() || name.front() == '/') return name;
  const char* dir = std::getenv("CUBELAB_OUT_DIR");
  if (dir == nullptr || *dir == '\0') return name;
  std::string out(dir);
  if (out.back() != '/') out += '/';
  return out + name;
}

}  // namespace cubelab
