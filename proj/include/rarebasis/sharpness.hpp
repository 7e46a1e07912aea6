#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "rarebasis/basis3d.hpp"

namespace rarebasis {

// 50 significant decimal digits; every transcendental value is evaluated
// again at 100 digits and the cross-precision gap, inflated, becomes the
// reported error bound. Exact quantities never enter this type.
using HPReal = boost::multiprecision::cpp_bin_float_50;

struct TrackedReal {
  HPReal value{0};
  HPReal abs_error{0};
};

// Growth gauge phi(x) = x * ln(1+x)^p.
struct PhiSpec {
  int p = 0;
  std::string name() const;
};

// One table entry: at depth k the certified superlevel volume, rescaled by
// the crystal volume and the gauge at height 2^k, gives the ratio
//     rho(k, p) = (S/4) / ln(1+2^k)^p,    S = total / 2^(2m_k - k - 2),
// where `total` is the certified slab sum of the depth-k construction. The
// numerator is exact; only the logarithm carries an error bound.
struct RatioRow {
  std::int64_t k = 0;
  std::int64_t alpha_log2 = 0;  // height parameter alpha = 2^(-k)
  int p = 0;
  BigInt quarter_sum;           // S, an integer
  DyadicScalar lower_bound;     // S/4, exact
  TrackedReal denominator;      // ln(1+2^k)^p
  TrackedReal ratio;
  std::optional<DyadicScalar> exact_ratio;  // present when p = 0
};

struct SharpnessTable {
  std::int64_t k_min = 0;
  std::int64_t k_max = 0;
  std::vector<RatioRow> rows;  // ordered by (k, p)
};

SharpnessTable sharpness_table(const BasisSpec& spec, std::int64_t k_min,
                               std::int64_t k_max, const std::vector<PhiSpec>& phis,
                               EngineMode mode, const ParallelOptions& par = {},
                               const VerifyOptions& verify = {});

// Per-gauge reading of the table: the growth degree d is fitted from the
// first and last rows via d = ln(rho_last/rho_first) / ln(k_last/k_first)
// and classified as quadratic (d >= 1.5), linear (0.5 < d < 1.5), or
// bounded (d <= 0.5). `checks_pass` covers the gauge-specific envelope:
//   p = 0: 8*S >= k^2 exactly for every row (ratio/k^2 >= 1/32),
//   p = 1: ratio/k within [1/64, 1], error-aware,
//   p = 2: ratio <= 0.15 everywhere and consecutive ratios within 10%
//          of each other from k = 8 on, error-aware.
struct TrendLine {
  int p = 0;
  std::string classification;
  TrackedReal growth_degree;
  bool checks_pass = false;
  std::string note;
};

struct TrendReport {
  std::vector<TrendLine> lines;
  std::string caveat;  // these are lower-bound witnesses, not operator bounds
};

TrendReport trend_report(const SharpnessTable& table);

// The same ratios over a finite scale pool: the table stops at the pool's
// doubling capacity, which is the content of the finiteness statement.
struct FiniteSReport {
  std::vector<std::int64_t> scales;
  std::int64_t capacity = 0;
  std::vector<RatioRow> rows;
  std::string statement;
};

FiniteSReport finite_s_report(const BasisSpec& spec, const std::vector<PhiSpec>& phis,
                              EngineMode mode, const ParallelOptions& par = {},
                              const VerifyOptions& verify = {});

}  // namespace rarebasis
