#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rarebasis/parallel.hpp"
#include "rarebasis/rare_set.hpp"

namespace rarebasis {

// Which evaluation path computes certified quantities. `symbolic` is the
// constraint algebra (exact at any size); `bitset` is the dense raster
// engine (exact, capped domains); `both` runs the two in lockstep and treats
// any mismatch as fatal.
enum class EngineMode { bitset, symbolic, both };
const char* engine_name(EngineMode mode);

struct VerifyOptions {
  std::uint64_t samples = 256;      // member checks per symbolic family
  std::uint64_t seed = 0x5eedf00dULL;  // fixed so results never depend on scheduling
  bool inject_engine_fault = false;  // test hook: force an engine mismatch
};

// The product square Q = Y x Y inside [0, 2^(m_k))^2.
struct Crystal2D {
  ExponentSequence seq;
  RareSet1D axis;  // identical on both axes

  static Crystal2D build(const ExponentSequence& seq);
  std::int64_t domain_log2() const { return seq.m_k(); }
  DyadicScalar measure() const;  // 2^(2(m_k - k))
};

// Axis-aligned rectangle with dyadic sides; corners on the unit-cell grid.
struct DyadicRect {
  DyadicScalar x_left;
  DyadicScalar y_left;
  std::int64_t width_log2 = 0;
  std::int64_t height_log2 = 0;

  std::int64_t area_log2() const { return width_log2 + height_log2; }
};

// Exact average of the crystal's indicator over the rectangle; factors as
// the product of the two axis averages.
DyadicScalar rect_average(const Crystal2D& crystal, const DyadicRect& rect);

// The level-j family: every x-translate of width 2^(m_j) crossed with every
// long interval of height 2^(m_{k-j+1} - m_j). Each member rectangle has
// area 2^(m_{k-j+1}) and crystal average exactly 2^(-k); the members are
// pairwise disjoint and their union is x_union x y_union.
struct RectFamily {
  std::int64_t level_j = 0;
  TranslateList x_translates;
  TranslateList y_intervals;
  RareSet1D x_union;
  RareSet1D y_union;
  std::int64_t width_log2 = 0;
  std::int64_t height_log2 = 0;
  std::int64_t area_log2 = 0;
  BigInt count;                 // x count times y count
  DyadicScalar union_measure;   // mu(x_union) * mu(y_union) = 2^(2m_k - k)

  // Member rectangles indexed row-major: index = xi * y_count + yi.
  DyadicRect member(const BigInt& index) const;
  bool pairwise_disjoint() const;
};

RectFamily build_rect_family(const Crystal2D& crystal, std::int64_t level_j);

// Exact measure of the union of the level-1..levels families, by the
// staircase decomposition (x unions grow with j, y unions shrink), plus the
// full pairwise overlap table and the half-weight accounting that the
// certificate chain consumes.
struct StaircaseResult {
  std::int64_t levels = 0;
  DyadicScalar union_measure;
  DyadicScalar half_fill_bound;  // sum over j of mu(U_j)/2, always <= union_measure
  std::vector<DyadicScalar> family_measures;
  std::vector<std::vector<DyadicScalar>> overlap;  // levels x levels, diagonal = family measure
};

StaircaseResult union_measure_staircase(const Crystal2D& crystal, std::int64_t levels);

// Finite union of constraint-set products, measured by inclusion-exclusion
// (constraint sets are closed under intersection). Cross-check device.
struct ProductRegion {
  std::vector<std::pair<RareSet1D, RareSet1D>> parts;
  DyadicScalar measure_inclusion_exclusion() const;
};

// Dense 2D raster over unit cells; the exhaustive engine for small domains.
class Raster2D {
 public:
  static constexpr std::int64_t kMaxDomainLog2 = 12;

  explicit Raster2D(std::int64_t domain_log2);

  std::int64_t domain_log2() const { return domain_log2_; }
  std::uint64_t side() const { return std::uint64_t{1} << domain_log2_; }
  void fill_rect(std::uint64_t x0, std::uint64_t y0, std::uint64_t w, std::uint64_t h);
  bool test(std::uint64_t x, std::uint64_t y) const;
  std::uint64_t count() const;
  bool subset_of(const Raster2D& other) const;
  bool operator==(const Raster2D& other) const;

 private:
  std::int64_t domain_log2_;
  std::uint64_t row_words_;
  std::vector<std::uint64_t> words_;
};

// Member rectangles of the given families painted onto a raster; requires
// materialized member lists and a domain within the raster cap.
Raster2D rasterize_families(const Crystal2D& crystal, const std::vector<RectFamily>& families);

// Exhaustive superlevel region: the union of every rectangle with dyadic
// side lengths 2^a x 2^(m_i - a), unit-cell-aligned anywhere in the domain,
// whose crystal average is >= level. Quadratic-ish; capped at 2^12 cells.
Raster2D brute_force_superlevel(const Crystal2D& crystal, const DyadicScalar& level);

struct FamilySummary {
  std::int64_t level_j = 0;
  BigInt count;
  std::int64_t area_log2 = 0;
  DyadicScalar union_measure;
};

// Certificate that the union of the level families meets the required lower
// bound k * 2^(2m_k - k - 3), i.e. (k/8) * 2^(2m_k - k):
//   union_measure    exact union of all families (staircase; raster-checked
//                    on small domains) = ((J+1)/2) * 2^(2m_k - k),
//   half_fill_bound  the half-weight accounting (J/2) * 2^(2m_k - k), the
//                    certified quantity the 3D chain consumes.
struct CrystalCertificate {
  ExponentSequence seq;
  std::int64_t k = 0;
  std::int64_t levels = 0;  // J = ceil(k/4)
  std::vector<FamilySummary> families;
  std::vector<std::vector<DyadicScalar>> overlap;
  DyadicScalar union_measure;
  DyadicScalar half_fill_bound;
  DyadicScalar required_bound;
  bool pass = false;
  bool cross_checked = false;  // dense engine confirmed the 1D quantities
};

CrystalCertificate certify_crystal(const Crystal2D& crystal, EngineMode mode,
                                   const ParallelOptions& par = {},
                                   const VerifyOptions& verify = {});

}  // namespace rarebasis
