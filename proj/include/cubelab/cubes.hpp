// Cube averages M_N(f_1, ..., f_{2^k-1}) over k-dimensional index windows.
//
// Index convention, fixed once for all k: function j corresponds to the
// nonempty subset eps(j) of {1..k} read off the binary digits of j (bit i set
// means index i_i participates), and the exponent of T for function j at
// (i_1..i_k) is the sum of the participating indices.  At k=2 this is the
// classical f_1(T^n x) f_2(T^m x) f_3(T^{n+m} x) layout.
//
// The fast path fixes (i_1..i_{k-2}) and evaluates the inner double average
// over (i_{k-1}, i_k) through a correlation profile, giving O(N^{k-1} log N)
// total cost against the naive N^k.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubelab/common.hpp"
#include "cubelab/fft.hpp"
#include "cubelab/orbits.hpp"

namespace cubelab {

enum class CorrelationMethod { Auto, Direct, Fft };

/// Reusable scratch for correlation profiles so hot loops do not allocate.
/// out[n] = (1/N) sum_{m<N} b[m] c[n+m] for n in [0, N).
///
/// The FFT path packs both real inputs into one complex signal, so a profile
/// costs two power-of-two transforms.  Support of b is [0,N) and of c is
/// [0,2N-1), and the transform length is >= 2N, so the cyclic correlation
/// never wraps and equals the linear one.
class CorrelationEngine {
 public:
  void profile(std::span<const double> b, std::span<const double> c, std::size_t N,
               std::vector<double>& out, CorrelationMethod method = CorrelationMethod::Auto) {
    if (N == 0) throw std::invalid_argument("correlation_profile: N must be >= 1");
    if (b.size() < N || c.size() < 2 * N - 1) {
      throw std::invalid_argument("correlation_profile: sequences too short for window");
    }
    if (method == CorrelationMethod::Auto) {
      method = N >= 32 ? CorrelationMethod::Fft : CorrelationMethod::Direct;
    }
    out.resize(N);
    // an identically-zero factor gives an exactly-zero profile; the packed
    // transform would instead leak rounding noise between the channels
    const auto all_zero = [](std::span<const double> s, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (s[i] != 0.0) return false;
      }
      return true;
    };
    if (all_zero(b, N) || all_zero(c, 2 * N - 1)) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    if (method == CorrelationMethod::Direct) {
      for (std::size_t n = 0; n < N; ++n) {
        CompensatedSum acc;
        for (std::size_t m = 0; m < N; ++m) acc.add(b[m] * c[n + m]);
        out[n] = acc.value() * inv_n;
      }
      return;
    }
    const std::size_t M = fft::next_pow2(2 * N);
    z_.assign(M, fft::Complex{0.0, 0.0});
    for (std::size_t m = 0; m < N; ++m) z_[m] = fft::Complex{b[m], c[m]};
    for (std::size_t m = N; m < 2 * N - 1; ++m) z_[m] = fft::Complex{0.0, c[m]};
    fft::forward_pow2(z_);
    spec_.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
      const fft::Complex zj = z_[j];
      const fft::Complex zr = std::conj(z_[(M - j) & (M - 1)]);
      const fft::Complex bj = 0.5 * (zj + zr);
      const fft::Complex cj = fft::Complex{0.0, -0.5} * (zj - zr);
      spec_[j] = std::conj(bj) * cj;
    }
    fft::inverse_pow2(spec_);
    for (std::size_t n = 0; n < N; ++n) out[n] = spec_[n].real() * inv_n;
  }

 private:
  std::vector<fft::Complex> z_;
  std::vector<fft::Complex> spec_;
};

inline std::vector<double> correlation_profile(std::span<const double> b,
                                               std::span<const double> c, std::size_t N,
                                               CorrelationMethod method =
                                                   CorrelationMethod::Auto) {
  CorrelationEngine engine;
  std::vector<double> out;
  engine.profile(b, c, N, out, method);
  return out;
}

struct CubeSpec {
  int k = 2;
  std::size_t N = 1;
  std::vector<OrbitSample> functions;  // position j-1 holds f_j

  CubeSpec(int k_, std::size_t N_, std::vector<OrbitSample> fs)
      : k(k_), N(N_), functions(std::move(fs)) {
    if (k < 2) throw std::invalid_argument("CubeSpec: k must be >= 2");
    if (k > 16) throw std::invalid_argument("CubeSpec: k too large");
    if (N < 1) throw std::invalid_argument("CubeSpec: N must be >= 1");
    const std::size_t want = (std::size_t{1} << k) - 1;
    if (functions.size() != want) {
      throw std::invalid_argument("CubeSpec: need exactly 2^k - 1 functions");
    }
    const std::size_t need = static_cast<std::size_t>(k) * (N - 1) + 1;
    for (const auto& f : functions) {
      if (f.values.size() < need) {
        throw std::invalid_argument("CubeSpec: orbit shorter than k(N-1)+1");
      }
    }
  }

  const OrbitSample& f(std::size_t j) const { return functions[j - 1]; }
  std::size_t count() const { return functions.size(); }

  double sup_product() const {
    double p = 1.0;
    for (const auto& f : functions) p *= f.observable.sup_bound();
    return p;
  }
};

struct CubeAverageResult {
  double value = 0.0;
  int k = 2;
  std::size_t N = 1;
  std::string method;
  double op_estimate = 0.0;
};

/// Product over all j of f_j evaluated at the subset-sum exponent of idx.
inline double cube_term(const CubeSpec& spec, std::span<const std::size_t> idx) {
  if (idx.size() != static_cast<std::size_t>(spec.k)) {
    throw std::invalid_argument("cube_term: index tuple must have k entries");
  }
  double prod = 1.0;
  for (std::size_t j = 1; j <= spec.count(); ++j) {
    std::size_t e = 0;
    for (int i = 0; i < spec.k; ++i) {
      if (j & (std::size_t{1} << i)) e += idx[i];
    }
    prod *= spec.f(j).values[e];
  }
  return prod;
}

/// Direct N^k summation in lexicographic order.  Exact modulo rounding;
/// the cost guard keeps accidental huge windows from hanging.
inline CubeAverageResult cube_average_naive(const CubeSpec& spec) {
  const double cost = std::pow(static_cast<double>(spec.N), spec.k);
  if (cost > 1e10) throw std::length_error("cube_average_naive: N^k too large");
  std::vector<std::size_t> idx(spec.k, 0);
  CompensatedSum acc;
  while (true) {
    acc.add(cube_term(spec, idx));
    int pos = spec.k - 1;
    while (pos >= 0 && ++idx[pos] == spec.N) idx[pos--] = 0;
    if (pos < 0) break;
  }
  CubeAverageResult r;
  r.value = acc.value() / cost;
  r.k = spec.k;
  r.N = spec.N;
  r.method = "naive";
  r.op_estimate = cost * static_cast<double>(spec.count());
  return r;
}

namespace detail {

// Function groups by participation of the two innermost indices i_{k-1}, i_k.
struct InnerGroups {
  std::vector<std::size_t> scalar;  // neither
  std::vector<std::size_t> g1;      // i_{k-1} only
  std::vector<std::size_t> g2;      // i_k only
  std::vector<std::size_t> g3;      // both
};

inline InnerGroups inner_groups(const CubeSpec& spec) {
  InnerGroups g;
  const std::size_t bit_km1 = std::size_t{1} << (spec.k - 2);
  const std::size_t bit_k = std::size_t{1} << (spec.k - 1);
  for (std::size_t j = 1; j <= spec.count(); ++j) {
    const bool a = (j & bit_km1) != 0;
    const bool b = (j & bit_k) != 0;
    if (!a && !b) g.scalar.push_back(j);
    else if (a && !b) g.g1.push_back(j);
    else if (!a && b) g.g2.push_back(j);
    else g.g3.push_back(j);
  }
  return g;
}

/// Exponent contribution of the outer indices v = (i_1..i_{k-2}) to f_j.
inline std::size_t outer_base(const CubeSpec& spec, std::size_t j,
                              std::span<const std::size_t> v) {
  std::size_t e = 0;
  for (int i = 0; i < spec.k - 2; ++i) {
    if (j & (std::size_t{1} << i)) e += v[static_cast<std::size_t>(i)];
  }
  return e;
}

inline void fill_group_product(const CubeSpec& spec, const std::vector<std::size_t>& js,
                               std::span<const std::size_t> v, std::size_t len,
                               std::vector<double>& out) {
  out.assign(len, 1.0);
  for (std::size_t j : js) {
    const auto& vals = spec.f(j).values;
    const std::size_t base = outer_base(spec, j, v);
    for (std::size_t n = 0; n < len; ++n) out[n] *= vals[base + n];
  }
}

struct InnerScratch {
  std::vector<double> g1, g2, g3, corr;
  CorrelationEngine engine;
};

/// Decode flat outer index to digits, most significant first.
inline void decode_outer(std::size_t flat, int digits, std::size_t N,
                         std::vector<std::size_t>& v) {
  v.assign(static_cast<std::size_t>(digits), 0);
  for (int t = digits - 1; t >= 0; --t) {
    v[static_cast<std::size_t>(t)] = flat % N;
    flat /= N;
  }
}

/// Per-outer-index inner double average over (i_{k-1}, i_k).
inline double inner_average(const CubeSpec& spec, const InnerGroups& groups,
                            std::span<const std::size_t> v, InnerScratch& scratch,
                            CorrelationMethod method) {
  const std::size_t N = spec.N;
  double scalar = 1.0;
  for (std::size_t j : groups.scalar) {
    scalar *= spec.f(j).values[outer_base(spec, j, v)];
  }
  fill_group_product(spec, groups.g1, v, N, scratch.g1);
  fill_group_product(spec, groups.g2, v, N, scratch.g2);
  fill_group_product(spec, groups.g3, v, 2 * N - 1, scratch.g3);
  scratch.engine.profile(scratch.g2, scratch.g3, N, scratch.corr, method);
  CompensatedSum acc;
  for (std::size_t n = 0; n < N; ++n) acc.add(scratch.g1[n] * scratch.corr[n]);
  return scalar * acc.value() / static_cast<double>(N);
}

}  // namespace detail

/// Correlation-accelerated evaluation of the same average.  Results are
/// bit-identical across thread counts: workers fill disjoint slots and the
/// final reduction runs sequentially in index order.
inline CubeAverageResult cube_average_fast(const CubeSpec& spec, unsigned threads = 1,
                                           CorrelationMethod method =
                                               CorrelationMethod::Auto) {
  const std::size_t N = spec.N;
  const auto groups = detail::inner_groups(spec);
  const int outer_digits = spec.k - 2;
  double outer_count_f = std::pow(static_cast<double>(N), outer_digits);
  if (outer_count_f > 1e9) throw std::length_error("cube_average_fast: N^{k-2} too large");
  const std::size_t outer_count = static_cast<std::size_t>(outer_count_f + 0.5);
  std::vector<double> slots(outer_count);
  parallel_for(outer_count, threads, [&](std::size_t flat) {
    thread_local detail::InnerScratch scratch;
    thread_local std::vector<std::size_t> v;
    detail::decode_outer(flat, outer_digits, N, v);
    slots[flat] = detail::inner_average(spec, groups, v, scratch, method);
  });
  CompensatedSum acc;
  for (double s : slots) acc.add(s);
  CubeAverageResult r;
  r.value = acc.value() / outer_count_f;
  r.k = spec.k;
  r.N = spec.N;
  r.method = "fast";
  const double M = static_cast<double>(fft::next_pow2(2 * N));
  r.op_estimate = outer_count_f *
                  (static_cast<double>(spec.count()) * 2.0 * static_cast<double>(N) +
                   5.0 * M * std::log2(M));
  return r;
}

/// (1/N) sum_{i_k} of the product of the functions that depend on i_k
/// (j in [2^{k-1}, 2^k)), with (i_1..i_{k-1}) held fixed.
inline double s_profile(const CubeSpec& spec, std::span<const std::size_t> fixed) {
  if (fixed.size() != static_cast<std::size_t>(spec.k - 1)) {
    throw std::invalid_argument("s_profile: need k-1 fixed indices");
  }
  for (std::size_t i : fixed) {
    if (i >= spec.N) throw std::out_of_range("s_profile: fixed index out of range");
  }
  const std::size_t first = std::size_t{1} << (spec.k - 1);
  CompensatedSum acc;
  for (std::size_t ik = 0; ik < spec.N; ++ik) {
    double prod = 1.0;
    for (std::size_t j = first; j <= spec.count(); ++j) {
      std::size_t e = ik;
      for (int i = 0; i + 1 < spec.k; ++i) {
        if (j & (std::size_t{1} << i)) e += fixed[static_cast<std::size_t>(i)];
      }
      prod *= spec.f(j).values[e];
    }
    acc.add(prod);
  }
  return acc.value() / static_cast<double>(spec.N);
}

namespace detail {

inline double s_block_half_product(const CubeSpec& spec, std::span<const std::size_t> idx,
                                   bool want_i1) {
  if (idx.size() != static_cast<std::size_t>(spec.k)) {
    throw std::invalid_argument("group product: index tuple must have k entries");
  }
  const std::size_t first = std::size_t{1} << (spec.k - 1);
  double prod = 1.0;
  for (std::size_t j = first; j <= spec.count(); ++j) {
    if (((j & 1u) != 0) != want_i1) continue;
    std::size_t e = 0;
    for (int i = 0; i < spec.k; ++i) {
      if (j & (std::size_t{1} << i)) e += idx[static_cast<std::size_t>(i)];
    }
    prod *= spec.f(j).values[e];
  }
  return prod;
}

}  // namespace detail

/// Product over the i_k-dependent functions that do not see i_1.
inline double a_group_product(const CubeSpec& spec, std::span<const std::size_t> idx) {
  return detail::s_block_half_product(spec, idx, false);
}

/// Product over the i_k-dependent functions that also see i_1.  Equals the
/// same A-type pattern evaluated with every orbit's base point advanced by
/// i_1 (exact on cyclic systems; property-tested).
inline double b_group_product(const CubeSpec& spec, std::span<const std::size_t> idx) {
  return detail::s_block_half_product(spec, idx, true);
}

/// Cauchy-Schwarz majorant of M_N^2:
///   prod_{j < 2^{k-1}} sup|f_j|^2 * N^{-(k-1)} sum |s_profile|^2.
/// The bound M_N^2 <= eq5_rhs holds exactly at every finite N with constant
/// 1 and is asserted here, not just reported.
inline double eq5_rhs(const CubeSpec& spec, unsigned threads = 1,
                      CorrelationMethod method = CorrelationMethod::Auto) {
  const std::size_t N = spec.N;
  const auto groups = detail::inner_groups(spec);
  const int outer_digits = spec.k - 2;
  const double outer_count_f = std::pow(static_cast<double>(N), outer_digits);
  if (outer_count_f > 1e9) throw std::length_error("eq5_rhs: N^{k-2} too large");
  const std::size_t outer_count = static_cast<std::size_t>(outer_count_f + 0.5);
  // For fixed (i_1..i_{k-2}), the map i_{k-1} -> s_profile is exactly the
  // correlation profile of the two halves of the i_k-dependent block.
  std::vector<double> slots(outer_count);
  parallel_for(outer_count, threads, [&](std::size_t flat) {
    thread_local detail::InnerScratch scratch;
    thread_local std::vector<std::size_t> v;
    detail::decode_outer(flat, outer_digits, N, v);
    detail::fill_group_product(spec, groups.g2, v, N, scratch.g2);
    detail::fill_group_product(spec, groups.g3, v, 2 * N - 1, scratch.g3);
    scratch.engine.profile(scratch.g2, scratch.g3, N, scratch.corr, method);
    CompensatedSum acc;
    for (double s : scratch.corr) acc.add(s * s);
    slots[flat] = acc.value();
  });
  CompensatedSum total;
  for (double s : slots) total.add(s);
  double prefactor = 1.0;
  const std::size_t first = std::size_t{1} << (spec.k - 1);
  for (std::size_t j = 1; j < first; ++j) {
    const double b = spec.f(j).observable.sup_bound();
    prefactor *= b * b;
  }
  const double rhs =
      prefactor * total.value() / (outer_count_f * static_cast<double>(N));
  const double mn = cube_average_fast(spec, threads, method).value;
  const double slack = 1e-12 * std::max(1.0, std::max(mn * mn, std::abs(rhs)));
  if (mn * mn > rhs + slack) {
    throw std::logic_error("eq5_rhs: Cauchy-Schwarz majorant violated");
  }
  return rhs;
}

}  // namespace cubelab
