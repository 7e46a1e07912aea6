#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <string>
#include <vector>

#include "rarebasis/errors.hpp"
#include "rarebasis/sharpness.hpp"

using namespace rarebasis;

namespace {

const std::vector<PhiSpec> kAllGauges = {{0}, {1}, {2}};

bool error_is_tiny(const TrackedReal& t) {
  return t.abs_error >= 0 && t.abs_error <= ldexp(abs(t.value), -100);
}

}  // namespace

TEST_CASE("gauge names") {
  CHECK(PhiSpec{0}.name() == "x");
  CHECK(PhiSpec{1}.name() == "x*ln(1+x)");
  CHECK(PhiSpec{2}.name() == "x*ln(1+x)^2");
  CHECK(PhiSpec{5}.name() == "x*ln(1+x)^5");
}

TEST_CASE("table rows: ordering, exact numerators, tracked denominators") {
  VerifyOptions light;
  light.samples = 8;
  const SharpnessTable table = sharpness_table(BasisSpec::all_from(1), 4, 6, kAllGauges,
                                               EngineMode::symbolic, {}, light);
  CHECK(table.k_min == 4);
  CHECK(table.k_max == 6);
  REQUIRE(table.rows.size() == 9);

  const std::vector<BigInt> want_s = {BigInt(4), BigInt(6), BigInt(8)};
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const RatioRow& row = table.rows[i];
    CHECK(row.k == 4 + static_cast<std::int64_t>(i / 3));
    CHECK(row.p == static_cast<int>(i % 3));
    CHECK(row.alpha_log2 == -row.k);
    CHECK(row.quarter_sum == want_s[i / 3]);
    CHECK(row.lower_bound == DyadicScalar::scaled(row.quarter_sum, -2));
    CHECK(error_is_tiny(row.denominator));
    CHECK(error_is_tiny(row.ratio));
    if (row.p == 0) {
      REQUIRE(row.exact_ratio.has_value());
      CHECK(*row.exact_ratio == row.lower_bound);
      CHECK(row.denominator.value == 1);
      CHECK(row.denominator.abs_error == 0);
    } else {
      CHECK_FALSE(row.exact_ratio.has_value());
      CHECK(row.denominator.value > 1);
    }
    // value * denominator recovers the exact numerator within the bound.
    const HPReal recon = row.ratio.value * row.denominator.value;
    const HPReal num = ldexp(HPReal(row.quarter_sum.str().c_str()), -2);
    CHECK(abs(recon - num) <= ldexp(num, -90));
  }
}

TEST_CASE("frozen logarithm digits") {
  const SharpnessTable table =
      sharpness_table(BasisSpec::all_from(1), 1, 3, {{1}, {2}}, EngineMode::both);
  REQUIRE(table.rows.size() == 6);

  // ln 3 and ln 5 to 40+ digits; ln 9 must match 2*ln 3 and its own square.
  const HPReal ln3("1.0986122886681096913952452369225257046474905578227");
  const HPReal ln5("1.6094379124341003746007593332261876395256013542685");
  const RatioRow& r1 = table.rows[0];  // k=1, p=1
  const RatioRow& r2 = table.rows[2];  // k=2, p=1
  const RatioRow& r3 = table.rows[4];  // k=3, p=1
  const RatioRow& r3sq = table.rows[5];  // k=3, p=2
  CHECK(abs(r1.denominator.value - ln3) <= r1.denominator.abs_error + ldexp(ln3, -140));
  CHECK(abs(r2.denominator.value - ln5) <= r2.denominator.abs_error + ldexp(ln5, -140));
  CHECK(abs(r3.denominator.value - 2 * ln3) <=
        r3.denominator.abs_error + ldexp(ln3, -139));
  CHECK(abs(r3sq.denominator.value - r3.denominator.value * r3.denominator.value) <=
        ldexp(r3sq.denominator.value, -130));

  // rho(1,1) = (1/4)/ln 3.
  CHECK(abs(r1.ratio.value - HPReal(0.25) / ln3) <= ldexp(HPReal(1), -140));
}

TEST_CASE("depth-4 ratios across the gauges") {
  const SharpnessTable table =
      sharpness_table(BasisSpec::all_from(1), 4, 4, kAllGauges, EngineMode::both);
  REQUIRE(table.rows.size() == 3);
  CHECK(*table.rows[0].exact_ratio == DyadicScalar(BigInt(1)));  // rho(4,0) = 1

  const RatioRow& p2 = table.rows[2];  // rho(4,2) = 1/ln(17)^2 = 0.12457...
  CHECK(p2.ratio.value > HPReal("0.1245"));
  CHECK(p2.ratio.value < HPReal("0.1246"));
  CHECK(p2.ratio.value + p2.ratio.abs_error <= HPReal(3) / 20);
}

TEST_CASE("table guards") {
  CHECK_THROWS_AS(sharpness_table(BasisSpec::all_from(1), 0, 3, kAllGauges,
                                  EngineMode::symbolic),
                  ValidationError);
  CHECK_THROWS_AS(sharpness_table(BasisSpec::all_from(1), 4, 3, kAllGauges,
                                  EngineMode::symbolic),
                  ValidationError);
  CHECK_THROWS_AS(sharpness_table(BasisSpec::all_from(1), 1, 3, {}, EngineMode::symbolic),
                  ValidationError);
  CHECK_THROWS_AS(sharpness_table(BasisSpec::all_from(1), 1, 3, {{9}},
                                  EngineMode::symbolic),
                  ValidationError);
  CHECK_THROWS_AS(sharpness_table(BasisSpec::all_from(1), 1, 3, {{-1}},
                                  EngineMode::symbolic),
                  ValidationError);
  try {
    sharpness_table(BasisSpec::finite({1, 2, 4}), 1, 4, kAllGauges, EngineMode::both);
    FAIL("expected CapacityError");
  } catch (const CapacityError& e) {
    CHECK(e.capacity == 3);
  }
  // Up to the pool's capacity the finite table works.
  const SharpnessTable ok =
      sharpness_table(BasisSpec::finite({1, 2, 4}), 1, 3, kAllGauges, EngineMode::both);
  CHECK(ok.rows.size() == 9);
}

TEST_CASE("trend classifications over the doubling ladder") {
  VerifyOptions light;
  light.samples = 4;
  const SharpnessTable table = sharpness_table(BasisSpec::all_from(1), 4, 12, kAllGauges,
                                               EngineMode::symbolic, {}, light);
  const TrendReport rep = trend_report(table);
  REQUIRE(rep.lines.size() == 3);
  CHECK(rep.caveat.find("lower-bound witnesses") != std::string::npos);

  const TrendLine& quad = rep.lines[0];
  CHECK(quad.p == 0);
  CHECK(quad.classification == "quadratic");
  CHECK(quad.checks_pass);
  CHECK(quad.growth_degree.value > HPReal("1.6"));
  CHECK(quad.growth_degree.value < HPReal("1.7"));
  CHECK(quad.note.find("holds") != std::string::npos);

  const TrendLine& lin = rep.lines[1];
  CHECK(lin.p == 1);
  CHECK(lin.classification == "linear");
  CHECK(lin.checks_pass);
  CHECK(lin.growth_degree.value > HPReal("0.6"));
  CHECK(lin.growth_degree.value < HPReal("0.7"));

  const TrendLine& bnd = rep.lines[2];
  CHECK(bnd.p == 2);
  CHECK(bnd.classification == "bounded");
  CHECK(bnd.checks_pass);
  CHECK(bnd.growth_degree.value < HPReal(0));
  CHECK(bnd.note.find("hold") != std::string::npos);
}

TEST_CASE("trend fit refuses thin tables") {
  const SharpnessTable thin =
      sharpness_table(BasisSpec::all_from(1), 4, 5, {{0}}, EngineMode::both);
  CHECK_THROWS_WITH_AS(trend_report(thin),
                       "trend fit for p = 0 needs at least 3 depths, got 2",
                       ValidationError);
}

TEST_CASE("finiteness report stops at the pool capacity") {
  const FiniteSReport rep =
      finite_s_report(BasisSpec::finite({1, 2, 4}), kAllGauges, EngineMode::both);
  CHECK(rep.scales == std::vector<std::int64_t>{1, 2, 4});
  CHECK(rep.capacity == 3);
  REQUIRE(rep.rows.size() == 9);
  CHECK(rep.rows.front().k == 1);
  CHECK(rep.rows.back().k == 3);
  CHECK(rep.rows.back().p == 2);
  CHECK(rep.statement.find("depth at most 3") != std::string::npos);
  CHECK(*rep.rows[0].exact_ratio == DyadicScalar::scaled(BigInt(1), -2));

  CHECK_THROWS_AS(finite_s_report(BasisSpec::all_from(1), kAllGauges, EngineMode::both),
                  ValidationError);
  CHECK_THROWS_AS(finite_s_report(BasisSpec::finite({1, 2, 4}), {}, EngineMode::both),
                  ValidationError);
}
