#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rarebasis/crystal2d.hpp"

namespace rarebasis {

// The scale pool the construction may draw from: either every integer
// exponent >= first, or an explicit finite list. A depth-k construction
// needs a doubling subsequence m_1 < ... < m_k with 2*m_j <= m_{j+1};
// the greedy chain (smallest scale, then smallest at least twice the last)
// is a longest one, so the pool's capacity is the greedy chain length.
class BasisSpec {
 public:
  static BasisSpec all_from(std::int64_t first);
  static BasisSpec finite(std::vector<std::int64_t> scales);

  bool is_finite() const { return scales_.has_value(); }
  const std::vector<std::int64_t>& scales() const;  // finite pools only

  // Longest doubling chain; unbounded pools have no finite capacity.
  std::optional<std::int64_t> capacity() const;

  // First k entries of the greedy chain. Throws CapacityError (carrying the
  // available depth) when a finite pool cannot reach depth k.
  ExponentSequence doubling_subsequence(std::int64_t k) const;

  std::string describe() const;

 private:
  BasisSpec() = default;
  std::optional<std::vector<std::int64_t>> scales_;  // sorted, distinct
  std::int64_t first_ = 1;
};

// The 3D set Z = Q x [0,1] inside [0, 2^m_k)^2 x [0,1].
struct Crystal3D {
  Crystal2D base;

  static Crystal3D build(const ExponentSequence& seq);
  DyadicScalar measure() const { return base.measure(); }  // unit z extent
};

// Axis-aligned box base x [0, 2^z_length_log2). Cylinders over scale-r
// rectangles use z length 2^(k-r) >= 1, so the unit z slab of Z is fully
// inside and the box average is the base average times 2^(r-k).
struct Cylinder {
  DyadicRect base;
  std::int64_t z_length_log2 = 0;
};

struct LiftResult {
  Cylinder cylinder;
  DyadicScalar average;  // exact box average of the indicator of Z
};

LiftResult lift_rect(const Crystal3D& crystal, const DyadicRect& rect, std::int64_t r);

// Number of translated copies of the depth-r square crystal inside the
// depth-k one: the square of the 1D copy count.
BigInt copy_count(const ExponentSequence& seq, std::int64_t r);

// One scale's slab accounting. Points whose z coordinate lies in
// [2^(k-r-1), 2^(k-r)) are covered by scale-r cylinders, so the slab
// contributes the plane region's measure times the slab thickness:
//     contribution = copies * per_copy_measure * 2^(k-r-1)
//                  = ceil(r/4) * 2^(2m_k - k - 2),
// which dominates floor_bound = r * 2^(2m_k - k - 4).
struct SlabRecord {
  std::int64_t r = 0;
  BigInt copies;
  DyadicScalar per_copy_measure;  // certified half-weight bound of the depth-r prefix
  std::int64_t slab_bottom_log2 = 0;  // slab = [2^bottom, 2^(bottom+1)), thickness 2^bottom
  DyadicScalar contribution;
  DyadicScalar floor_bound;
  bool cross_checked = false;  // the prefix certificate ran with the dense engine
};

SlabRecord slab_contribution(const ExponentSequence& seq, std::int64_t r, EngineMode mode,
                             const ParallelOptions& par = {},
                             const VerifyOptions& verify = {});

// Certificate that the slabs, pairwise disjoint in z, together give
//     total >= required_bound = k^2 * 2^(2m_k - k - 5),
// the claimed superlevel volume bound for the depth-k construction.
struct BasisCertificate {
  ExponentSequence seq;
  std::int64_t k = 0;
  std::vector<SlabRecord> slabs;
  DyadicScalar total;
  DyadicScalar required_bound;
  bool pass = false;
  bool cross_checked = false;
};

BasisCertificate certify_basis(const ExponentSequence& seq, EngineMode mode,
                               const ParallelOptions& par = {},
                               const VerifyOptions& verify = {});
BasisCertificate certify_basis(const BasisSpec& spec, std::int64_t k, EngineMode mode,
                               const ParallelOptions& par = {},
                               const VerifyOptions& verify = {});

}  // namespace rarebasis
