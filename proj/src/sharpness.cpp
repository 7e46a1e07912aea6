#include "rarebasis/sharpness.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "rarebasis/errors.hpp"

namespace rarebasis {
namespace {

using HPWide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>>;

// Relative rounding slack for the 50-digit type (166 mantissa bits): added
// on top of the inflated cross-precision gap so the bound stays honest for
// the final few roundings.
const HPReal kUlpRel = ldexp(HPReal(1), -150);

template <typename R>
R log_one_plus_pow2(std::int64_t k) {
  return log(ldexp(R(1), static_cast<int>(k)) + 1);
}

HPReal to_hp(const DyadicScalar& x) {
  return ldexp(HPReal(x.mantissa()), static_cast<int>(-x.exponent()));
}

TrackedReal tracked_log_pow(std::int64_t k, int p) {
  if (p == 0) return TrackedReal{HPReal(1), HPReal(0)};
  const HPReal narrow = pow(log_one_plus_pow2<HPReal>(k), p);
  const HPWide wide = pow(log_one_plus_pow2<HPWide>(k), p);
  const HPReal gap = abs(narrow - wide.convert_to<HPReal>());
  return TrackedReal{narrow, 4 * gap + abs(narrow) * kUlpRel};
}

TrackedReal divide_tracked(const DyadicScalar& num, const TrackedReal& denom) {
  if (denom.value <= denom.abs_error) {
    throw ArithmeticError("denominator interval touches zero");
  }
  const HPReal n = to_hp(num);
  const HPReal mid = n / denom.value;
  const HPReal lo = n / (denom.value + denom.abs_error);
  const HPReal hi = n / (denom.value - denom.abs_error);
  return TrackedReal{mid, (hi - lo) + abs(mid) * kUlpRel};
}

void validate_phis(const std::vector<PhiSpec>& phis) {
  if (phis.empty()) throw ValidationError("no gauges requested");
  for (const PhiSpec& phi : phis) {
    if (phi.p < 0 || phi.p > 8) {
      throw ValidationError("gauge power p = " + std::to_string(phi.p) +
                            " outside the supported range 0..8");
    }
  }
}

RatioRow make_row(std::int64_t k, int p, const BigInt& quarter_sum) {
  RatioRow row;
  row.k = k;
  row.alpha_log2 = -k;
  row.p = p;
  row.quarter_sum = quarter_sum;
  row.lower_bound = DyadicScalar::scaled(quarter_sum, -2);
  row.denominator = tracked_log_pow(k, p);
  row.ratio = divide_tracked(row.lower_bound, row.denominator);
  if (p == 0) row.exact_ratio = row.lower_bound;
  return row;
}

// The integer S with total = S * 2^(2m_k - k - 2).
BigInt quarter_sum_of(const BasisCertificate& cert) {
  const std::int64_t mk = cert.seq.m_k();
  return cert.total.mul_pow2(-(2 * mk - cert.k - 2)).to_integer();
}

}  // namespace

std::string PhiSpec::name() const {
  if (p == 0) return "x";
  std::string out = "x*ln(1+x)";
  if (p > 1) out += "^" + std::to_string(p);
  return out;
}

SharpnessTable sharpness_table(const BasisSpec& spec, std::int64_t k_min,
                               std::int64_t k_max, const std::vector<PhiSpec>& phis,
                               EngineMode mode, const ParallelOptions& par,
                               const VerifyOptions& verify) {
  if (k_min < 1) throw ValidationError("depth range starts at 1");
  if (k_max < k_min) throw ValidationError("empty depth range");
  validate_phis(phis);
  if (const auto cap = spec.capacity(); cap && *cap < k_max) {
    throw CapacityError("scale pool " + spec.describe() + " supports depth " +
                            std::to_string(*cap) + ", not a table up to " +
                            std::to_string(k_max),
                        *cap);
  }

  SharpnessTable table{k_min, k_max, {}};
  for (std::int64_t k = k_min; k <= k_max; ++k) {
    const BasisCertificate cert = certify_basis(spec, k, mode, par, verify);
    const BigInt quarter_sum = quarter_sum_of(cert);
    for (const PhiSpec& phi : phis) {
      table.rows.push_back(make_row(k, phi.p, quarter_sum));
    }
  }
  return table;
}

TrendReport trend_report(const SharpnessTable& table) {
  TrendReport rep;
  rep.caveat =
      "ratios are certified lower-bound witnesses; a 'bounded' trend describes "
      "this witness family, not an upper bound on the operator";

  std::vector<int> ps;
  for (const RatioRow& row : table.rows) {
    if (std::find(ps.begin(), ps.end(), row.p) == ps.end()) ps.push_back(row.p);
  }

  for (const int p : ps) {
    std::vector<const RatioRow*> rows;
    for (const RatioRow& row : table.rows) {
      if (row.p == p) rows.push_back(&row);
    }
    if (rows.size() < 3) {
      throw ValidationError("trend fit for p = " + std::to_string(p) + " needs at least 3 depths, got " +
                            std::to_string(rows.size()));
    }
    const RatioRow& first = *rows.front();
    const RatioRow& last = *rows.back();

    TrendLine line;
    line.p = p;

    const HPReal span = log(HPReal(last.k) / HPReal(first.k));
    line.growth_degree.value = log(last.ratio.value / first.ratio.value) / span;
    const HPReal rel = first.ratio.abs_error / first.ratio.value +
                       last.ratio.abs_error / last.ratio.value;
    line.growth_degree.abs_error = 2 * rel / span + kUlpRel;

    const HPReal d = line.growth_degree.value;
    if (d >= HPReal(3) / 2) {
      line.classification = "quadratic";
    } else if (d > HPReal(1) / 2) {
      line.classification = "linear";
    } else {
      line.classification = "bounded";
    }

    std::ostringstream note;
    bool ok = true;
    if (p == 0) {
      // Exact envelope: rho/k^2 = S/(4k^2) >= 1/32  <=>  8S >= k^2.
      for (const RatioRow* row : rows) {
        ok = ok && (8 * row->quarter_sum >= BigInt(row->k) * row->k);
      }
      note << "exact envelope ratio/k^2 >= 1/32 " << (ok ? "holds" : "FAILS")
           << " on all " << rows.size() << " depths";
    } else if (p == 1) {
      // ratio/k within [1/64, 1], error-aware on both sides.
      for (const RatioRow* row : rows) {
        const HPReal lo = row->ratio.value - row->ratio.abs_error;
        const HPReal hi = row->ratio.value + row->ratio.abs_error;
        ok = ok && lo * 64 >= HPReal(row->k) && hi <= HPReal(row->k);
      }
      note << "bracket 1/64 <= ratio/k <= 1 " << (ok ? "holds" : "FAILS")
           << " on all " << rows.size() << " depths";
    } else if (p == 2) {
      const HPReal cap = HPReal(3) / 20;  // 0.15
      for (const RatioRow* row : rows) {
        ok = ok && (row->ratio.value + row->ratio.abs_error <= cap);
      }
      bool stable = true;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i]->k < 8) continue;
        const HPReal delta = abs(rows[i]->ratio.value - rows[i - 1]->ratio.value) +
                             rows[i]->ratio.abs_error + rows[i - 1]->ratio.abs_error;
        const HPReal base = rows[i]->ratio.value - rows[i]->ratio.abs_error;
        stable = stable && (delta * 10 <= base);
      }
      ok = ok && stable;
      note << "cap ratio <= 0.15 and 10% stabilization from depth 8 "
           << (ok ? "hold" : "FAIL");
    } else {
      note << "no envelope defined for p = " << p;
    }
    line.checks_pass = ok;
    line.note = note.str();
    rep.lines.push_back(std::move(line));
  }
  return rep;
}

FiniteSReport finite_s_report(const BasisSpec& spec, const std::vector<PhiSpec>& phis,
                              EngineMode mode, const ParallelOptions& par,
                              const VerifyOptions& verify) {
  if (!spec.is_finite()) {
    throw ValidationError("finiteness report needs a finite scale pool");
  }
  validate_phis(phis);
  const std::int64_t cap = *spec.capacity();

  FiniteSReport rep;
  rep.scales = spec.scales();
  rep.capacity = cap;
  for (std::int64_t k = 1; k <= cap; ++k) {
    const BasisCertificate cert = certify_basis(spec, k, mode, par, verify);
    const BigInt quarter_sum = quarter_sum_of(cert);
    for (const PhiSpec& phi : phis) {
      rep.rows.push_back(make_row(k, phi.p, quarter_sum));
    }
  }
  std::ostringstream statement;
  statement << "the scale pool " << spec.describe()
            << " admits doubling chains of depth at most " << cap
            << "; the certified lower bounds stop there, so the ratio table is "
               "finite and witnesses no blow-up in the depth parameter";
  rep.statement = statement.str();
  return rep;
}

}  // namespace rarebasis
