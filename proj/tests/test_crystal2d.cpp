#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <vector>

#include "rarebasis/crystal2d.hpp"
#include "rarebasis/errors.hpp"
#include "rarebasis/parallel.hpp"
#include "rarebasis/rare_set.hpp"

using namespace rarebasis;

namespace {

Crystal2D crystal_of(std::initializer_list<std::int64_t> m) {
  return Crystal2D::build(ExponentSequence::create(std::vector<std::int64_t>(m)));
}

// Brute cell-count average of the crystal indicator over a rectangle.
DyadicScalar brute_rect_average(const Crystal2D& crystal, const DyadicRect& rect) {
  const CellBitset axis = crystal.axis.rasterize();
  const std::uint64_t x0 = rect.x_left.to_integer().convert_to<std::uint64_t>();
  const std::uint64_t y0 = rect.y_left.to_integer().convert_to<std::uint64_t>();
  const std::uint64_t w = std::uint64_t{1} << rect.width_log2;
  const std::uint64_t h = std::uint64_t{1} << rect.height_log2;
  const std::uint64_t cx = axis.count_range(x0, x0 + w);
  const std::uint64_t cy = axis.count_range(y0, y0 + h);
  return DyadicScalar(BigInt(cx) * BigInt(cy), rect.area_log2());
}

}  // namespace

TEST_CASE("crystal basics") {
  const Crystal2D q = crystal_of({1, 2, 4});
  CHECK(q.domain_log2() == 4);
  CHECK(q.measure() == DyadicScalar::pow2(2));  // 2^(2*(4-3))
  CHECK(q.axis.rasterize().count() == 2);
  CHECK(crystal_of({1}).measure() == DyadicScalar(BigInt(1)));
}

TEST_CASE("rectangle averages match the cell-count oracle") {
  const Crystal2D q = crystal_of({1, 2, 4});
  // Whole domain: density 2^(-2k).
  CHECK(rect_average(q, DyadicRect{DyadicScalar(BigInt(0)), DyadicScalar(BigInt(0)), 4, 4}) ==
        DyadicScalar::pow2(-6));
  // Unit cells.
  CHECK(rect_average(q, DyadicRect{DyadicScalar(BigInt(0)), DyadicScalar(BigInt(0)), 0, 0}) ==
        DyadicScalar(BigInt(1)));
  CHECK(rect_average(q, DyadicRect{DyadicScalar(BigInt(1)), DyadicScalar(BigInt(0)), 0, 0}) ==
        DyadicScalar(BigInt(0)));

  // Random dyadic rectangles with arbitrary integer corners.
  const std::vector<Crystal2D> pool = {crystal_of({1}), crystal_of({2}), crystal_of({1, 2}),
                                       crystal_of({1, 3}), crystal_of({1, 2, 4}),
                                       crystal_of({2, 4, 6}), crystal_of({1, 2, 6})};
  std::uint64_t state = 0xc2d2u;
  const auto next = [&state] { return splitmix64(++state); };
  for (int trial = 0; trial < 4000; ++trial) {
    const Crystal2D& q2 = pool[next() % pool.size()];
    const std::int64_t d = q2.domain_log2();
    const std::int64_t w = static_cast<std::int64_t>(next() % (d + 1));
    const std::int64_t h = static_cast<std::int64_t>(next() % (d + 1));
    const std::uint64_t x0 = next() % ((std::uint64_t{1} << d) - (std::uint64_t{1} << w) + 1);
    const std::uint64_t y0 = next() % ((std::uint64_t{1} << d) - (std::uint64_t{1} << h) + 1);
    const DyadicRect rect{DyadicScalar(BigInt(x0)), DyadicScalar(BigInt(y0)), w, h};
    const DyadicScalar got = rect_average(q2, rect);
    CAPTURE(q2.seq.str());
    CAPTURE(x0);
    CAPTURE(y0);
    REQUIRE(got == brute_rect_average(q2, rect));
  }
}

TEST_CASE("level-1 family of the depth-4 doubling crystal") {
  const Crystal2D q = crystal_of({1, 2, 4, 8});
  const RectFamily fam = build_rect_family(q, 1);
  CHECK(fam.level_j == 1);
  CHECK(fam.width_log2 == 1);
  CHECK(fam.height_log2 == 7);
  CHECK(fam.area_log2 == 8);  // area 2^(m_k)
  CHECK(fam.count == BigInt(16));
  CHECK(fam.union_measure == DyadicScalar::pow2(12));  // 2^(2m_k - k)
  CHECK(fam.pairwise_disjoint());
  for (BigInt i = 0; i < fam.count; ++i) {
    CHECK(rect_average(q, fam.member(i)) == DyadicScalar::pow2(-4));
  }
  CHECK_THROWS_AS(fam.member(BigInt(16)), DomainError);
  CHECK_THROWS_AS(fam.member(BigInt(-1)), DomainError);

  // Row-major member indexing walks y first.
  const RectFamily f2 = build_rect_family(q, 2);
  CHECK(f2.count == BigInt(256));
  CHECK(f2.width_log2 == 2);
  CHECK(f2.height_log2 == 2);
  const BigInt y_count = f2.y_intervals.count();
  CHECK(f2.member(BigInt(1)).x_left == f2.member(BigInt(0)).x_left);
  CHECK(f2.member(y_count).y_left == f2.member(BigInt(0)).y_left);
  CHECK(f2.member(y_count).x_left == DyadicScalar(f2.x_translates.offset(BigInt(1))));

  CHECK_THROWS_AS(build_rect_family(q, 0), DomainError);
  CHECK_THROWS_AS(build_rect_family(q, 3), DomainError);  // past the long-interval cap
}

TEST_CASE("family averages across a mixed pool") {
  for (const Crystal2D& q : {crystal_of({1}), crystal_of({1, 2}), crystal_of({1, 3}),
                             crystal_of({1, 2, 4}), crystal_of({1, 2, 5}),
                             crystal_of({1, 3, 6, 12})}) {
    const std::int64_t k = q.seq.k();
    const std::int64_t levels = (k + 3) / 4;
    for (std::int64_t j = 1; j <= levels; ++j) {
      const RectFamily fam = build_rect_family(q, j);
      CAPTURE(q.seq.str());
      CAPTURE(j);
      REQUIRE(fam.count == fam.x_translates.count() * fam.y_intervals.count());
      REQUIRE(fam.area_log2 == q.seq.m(k - j + 1));
      REQUIRE(fam.union_measure == DyadicScalar::pow2(2 * q.seq.m_k() - k));
      REQUIRE(fam.pairwise_disjoint());
      const BigInt probes = fam.count < BigInt(8) ? fam.count : BigInt(8);
      for (BigInt i = 0; i < probes; ++i) {
        REQUIRE(rect_average(q, fam.member(i)) == DyadicScalar::pow2(-k));
      }
    }
  }
}

TEST_CASE("staircase union, half-weight accounting and overlaps") {
  const Crystal2D q = crystal_of({1, 2, 4, 8});
  const StaircaseResult two = union_measure_staircase(q, 2);
  CHECK(two.levels == 2);
  CHECK(two.union_measure == DyadicScalar(BigInt(3)).mul_pow2(11));  // 6144
  CHECK(two.half_fill_bound == DyadicScalar::pow2(12));
  CHECK(two.family_measures ==
        std::vector<DyadicScalar>{DyadicScalar::pow2(12), DyadicScalar::pow2(12)});
  CHECK(two.overlap[0][0] == DyadicScalar::pow2(12));
  CHECK(two.overlap[0][1] == DyadicScalar::pow2(11));
  CHECK(two.overlap[1][0] == DyadicScalar::pow2(11));
  CHECK(two.overlap[1][1] == DyadicScalar::pow2(12));

  const StaircaseResult one = union_measure_staircase(q, 1);
  CHECK(one.union_measure == DyadicScalar::pow2(12));
  CHECK(one.half_fill_bound == DyadicScalar::pow2(11));

  // Exact union against the dense 2D raster.
  const std::vector<RectFamily> fams = {build_rect_family(q, 1), build_rect_family(q, 2)};
  const Raster2D painted = rasterize_families(q, fams);
  CHECK(DyadicScalar(BigInt(painted.count())) == two.union_measure);

  CHECK_THROWS_AS(union_measure_staircase(q, 0), ValidationError);
  CHECK_THROWS_AS(union_measure_staircase(q, 3), DomainError);
}

TEST_CASE("staircase generalizes across sequences and levels") {
  for (const Crystal2D& q :
       {crystal_of({1, 2}), crystal_of({1, 2, 4}), crystal_of({1, 2, 4, 8}),
        crystal_of({1, 2, 4, 9}), crystal_of({1, 3, 6, 12})}) {
    const std::int64_t k = q.seq.k();
    const std::int64_t max_levels = std::max((k + 3) / 4, k / 2);
    for (std::int64_t J = 1; J <= max_levels; ++J) {
      const StaircaseResult st = union_measure_staircase(q, J);
      const std::int64_t base = 2 * q.seq.m_k() - k;
      CAPTURE(q.seq.str());
      CAPTURE(J);
      // ((J+1)/2) * 2^base and (J/2) * 2^base.
      REQUIRE(st.union_measure == DyadicScalar::scaled(BigInt(J + 1), base - 1));
      REQUIRE(st.half_fill_bound == DyadicScalar::scaled(BigInt(J), base - 1));
      for (std::int64_t i = 0; i < J; ++i) {
        for (std::int64_t j = 0; j < J; ++j) {
          REQUIRE(st.overlap[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
                  DyadicScalar::pow2(base - std::abs(i - j)));
        }
      }
      if (q.domain_log2() <= 10) {
        std::vector<RectFamily> fams;
        for (std::int64_t j = 1; j <= J; ++j) fams.push_back(build_rect_family(q, j));
        const Raster2D painted = rasterize_families(q, fams);
        REQUIRE(DyadicScalar(BigInt(painted.count())) == st.union_measure);
      }
    }
  }
}

TEST_CASE("product-region inclusion-exclusion agrees with the raster") {
  const Crystal2D q = crystal_of({1, 2, 4, 8});
  const RectFamily f1 = build_rect_family(q, 1);
  const RectFamily f2 = build_rect_family(q, 2);
  const ProductRegion region{{{f1.x_union, f1.y_union}, {f2.x_union, f2.y_union}}};
  CHECK(region.measure_inclusion_exclusion() == DyadicScalar(BigInt(3)).mul_pow2(11));

  const ProductRegion single{{{f1.x_union, f1.y_union}}};
  CHECK(single.measure_inclusion_exclusion() == DyadicScalar::pow2(12));
  CHECK(ProductRegion{}.measure_inclusion_exclusion() == DyadicScalar(BigInt(0)));

  // Adding the whole domain as a part absorbs everything.
  const ProductRegion all{{{f1.x_union, f1.y_union},
                           {RareSet1D::constraint_set(8, {}), RareSet1D::constraint_set(8, {})}}};
  CHECK(all.measure_inclusion_exclusion() == DyadicScalar::pow2(16));

  ProductRegion too_many;
  for (int i = 0; i < 21; ++i) {
    too_many.parts.push_back({RareSet1D::constraint_set(1, {}), RareSet1D::constraint_set(1, {})});
  }
  CHECK_THROWS_AS(too_many.measure_inclusion_exclusion(), ValidationError);
}

TEST_CASE("2D raster primitives") {
  Raster2D r(3);
  CHECK(r.side() == 8);
  CHECK(r.count() == 0);
  r.fill_rect(1, 2, 3, 2);
  CHECK(r.count() == 6);
  CHECK(r.test(1, 2));
  CHECK(r.test(3, 3));
  CHECK_FALSE(r.test(0, 2));
  CHECK_FALSE(r.test(1, 1));
  r.fill_rect(1, 2, 3, 2);  // idempotent overpaint
  CHECK(r.count() == 6);
  CHECK_THROWS_AS(r.fill_rect(6, 0, 3, 1), DomainError);
  CHECK_THROWS_AS(r.fill_rect(0, 7, 1, 2), DomainError);
  CHECK_THROWS_AS(r.fill_rect(0, 0, 0, 1), DomainError);

  Raster2D bigger(3);
  bigger.fill_rect(1, 2, 3, 2);
  bigger.fill_rect(0, 0, 1, 1);
  CHECK(r.subset_of(bigger));
  CHECK_FALSE(bigger.subset_of(r));
  CHECK_FALSE(r == bigger);
  Raster2D same(3);
  same.fill_rect(1, 2, 3, 2);
  CHECK(r == same);
  CHECK_THROWS_AS(r.subset_of(Raster2D(2)), DomainError);
  CHECK_THROWS_AS(Raster2D(13), ValidationError);
  CHECK_THROWS_AS(Raster2D(-1), ValidationError);

  // Word-boundary fills on the widest supported raster.
  Raster2D wide(7);
  wide.fill_rect(60, 0, 8, 1);
  CHECK(wide.count() == 8);
  CHECK(wide.test(63, 0));
  CHECK(wide.test(64, 0));
  CHECK_FALSE(wide.test(68, 0));
}

TEST_CASE("exhaustive superlevel search on tiny crystals") {
  const Crystal2D unit = crystal_of({1});
  CHECK(brute_force_superlevel(unit, DyadicScalar(BigInt(1))).count() == 0);
  const Raster2D half = brute_force_superlevel(unit, DyadicScalar::pow2(-1));
  CHECK(half.count() == 3);
  CHECK(half.test(0, 0));
  CHECK(half.test(1, 0));
  CHECK(half.test(0, 1));
  CHECK_FALSE(half.test(1, 1));

  // Lowering the threshold only grows the set.
  const Crystal2D q2 = crystal_of({1, 2});
  const Raster2D at = brute_force_superlevel(q2, DyadicScalar::pow2(-1));
  const Raster2D below = brute_force_superlevel(q2, DyadicScalar::pow2(-2));
  CHECK(at.subset_of(below));
  CHECK(at.count() < below.count());

  CHECK_THROWS_AS(brute_force_superlevel(crystal_of({1, 2, 4, 8, 16}), DyadicScalar::pow2(-5)),
                  ValidationError);
}

TEST_CASE("certified families sit inside the true superlevel set") {
  for (const Crystal2D& q :
       {crystal_of({1, 2}), crystal_of({1, 2, 4}), crystal_of({1, 2, 4, 8})}) {
    const std::int64_t k = q.seq.k();
    std::vector<RectFamily> fams;
    for (std::int64_t j = 1; j <= (k + 3) / 4; ++j) fams.push_back(build_rect_family(q, j));
    const Raster2D painted = rasterize_families(q, fams);
    const Raster2D oracle = brute_force_superlevel(q, DyadicScalar::pow2(-k));
    CAPTURE(q.seq.str());
    CHECK(painted.subset_of(oracle));
    CHECK(painted.count() > 0);
  }
}

TEST_CASE("crystal certificates: frozen values") {
  const CrystalCertificate c2 = certify_crystal(crystal_of({1, 2}), EngineMode::both);
  CHECK(c2.k == 2);
  CHECK(c2.levels == 1);
  CHECK(c2.families.size() == 1);
  CHECK(c2.union_measure == DyadicScalar(BigInt(4)));
  CHECK(c2.half_fill_bound == DyadicScalar(BigInt(2)));
  CHECK(c2.required_bound == DyadicScalar(BigInt(1)));
  CHECK(c2.pass);
  CHECK(c2.cross_checked);

  // Depth 4 is the equality case: half-weight bound meets the target exactly.
  const CrystalCertificate c4 = certify_crystal(crystal_of({1, 2, 4, 8}), EngineMode::both);
  CHECK(c4.levels == 1);
  CHECK(c4.union_measure == DyadicScalar::pow2(12));
  CHECK(c4.half_fill_bound == DyadicScalar::pow2(11));
  CHECK(c4.required_bound == DyadicScalar::pow2(11));
  CHECK(c4.pass);
  CHECK(c4.families[0].count == BigInt(16));
  CHECK(c4.families[0].area_log2 == 8);

  const CrystalCertificate c5 = certify_crystal(crystal_of({1, 2, 4, 8, 16}), EngineMode::both);
  CHECK(c5.levels == 2);
  CHECK(c5.union_measure == DyadicScalar(BigInt(3)).mul_pow2(26));
  CHECK(c5.half_fill_bound == DyadicScalar::pow2(27));
  CHECK(c5.required_bound == DyadicScalar(BigInt(5)).mul_pow2(24));
  CHECK(c5.overlap[0][1] == DyadicScalar::pow2(26));
  CHECK(c5.pass);
  CHECK(c5.cross_checked);
}

TEST_CASE("certificates hold on non-doubling admissible sequences") {
  const CrystalCertificate c = certify_crystal(crystal_of({1, 3, 6, 12}), EngineMode::both);
  CHECK(c.union_measure == DyadicScalar::pow2(20));
  CHECK(c.half_fill_bound == DyadicScalar::pow2(19));
  CHECK(c.required_bound == DyadicScalar(BigInt(4)).mul_pow2(17));
  CHECK(c.pass);
  CHECK(c.cross_checked);  // domain 2^12 also ran the 2D raster comparison

  const CrystalCertificate deep =
      certify_crystal(crystal_of({1, 2, 4, 8, 12}), EngineMode::both);
  CHECK(deep.levels == 2);
  CHECK(deep.union_measure == DyadicScalar(BigInt(3)).mul_pow2(18));
  CHECK(deep.pass);
}

TEST_CASE("engine modes and capacity guards") {
  const Crystal2D q = crystal_of({1, 2, 4});
  const CrystalCertificate sym = certify_crystal(q, EngineMode::symbolic);
  CHECK(sym.pass);
  CHECK_FALSE(sym.cross_checked);
  const CrystalCertificate dense = certify_crystal(q, EngineMode::bitset);
  CHECK(dense.pass);
  CHECK(dense.cross_checked);

  // Past the dense cap only the symbolic engine works.
  const Crystal2D big = Crystal2D::build(ExponentSequence::create({1, 2, 4, 8, 16, 32}));
  CHECK_THROWS_AS(certify_crystal(big, EngineMode::both), ValidationError);
  VerifyOptions light;
  light.samples = 16;
  const CrystalCertificate sc = certify_crystal(big, EngineMode::symbolic, {}, light);
  CHECK(sc.pass);
  CHECK_FALSE(sc.cross_checked);
  CHECK(sc.union_measure == DyadicScalar(BigInt(3)).mul_pow2(57));
}

TEST_CASE("parallel member checks match serial") {
  const Crystal2D q = crystal_of({1, 2, 4, 8});
  const CrystalCertificate serial = certify_crystal(q, EngineMode::both, ParallelOptions{1});
  const CrystalCertificate wide = certify_crystal(q, EngineMode::both, ParallelOptions{8});
  CHECK(serial.union_measure == wide.union_measure);
  CHECK(serial.half_fill_bound == wide.half_fill_bound);
  CHECK(serial.pass == wide.pass);
}

TEST_CASE("an injected engine fault trips the identity checks") {
  VerifyOptions faulty;
  faulty.inject_engine_fault = true;
  CHECK_THROWS_AS(certify_crystal(crystal_of({1, 2}), EngineMode::both, {}, faulty),
                  EngineDisagreement);
  CHECK_THROWS_AS(certify_crystal(crystal_of({1, 2}), EngineMode::symbolic, {}, faulty),
                  EngineDisagreement);
  CHECK_THROWS_AS(certify_crystal(crystal_of({1, 2}), EngineMode::bitset, {}, faulty),
                  EngineDisagreement);
}
