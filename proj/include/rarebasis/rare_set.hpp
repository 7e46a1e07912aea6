#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rarebasis/bitset1d.hpp"
#include "rarebasis/dyadic.hpp"

namespace rarebasis {

// Strictly increasing scale exponents m_1 < m_2 < ... < m_k, all >= 1.
// Construction enforces the nesting inequality
//     m_{k-j} <= m_{k-j+1} - m_j   for 1 <= j <= k/2,
// which is what the long-interval construction at level j needs in order to
// tile the left half of a scale-(k-j+1) block with full-length intervals.
class ExponentSequence {
 public:
  // Scales enter shift counts of big integers, so unbounded exponents would
  // turn into unbounded allocations; anything past this cap is rejected.
  static constexpr std::int64_t kMaxExponent = std::int64_t{1} << 20;

  static ExponentSequence create(std::vector<std::int64_t> exponents);

  std::int64_t k() const { return static_cast<std::int64_t>(m_.size()); }
  // 1-based accessor matching the construction's indexing.
  std::int64_t m(std::int64_t j) const;
  std::int64_t m_k() const { return m_.back(); }
  const std::vector<std::int64_t>& exponents() const { return m_; }

  // 2*m_j <= m_{j+1} for every j; implies every prefix is admissible.
  bool is_doubling() const;
  ExponentSequence prefix(std::int64_t r) const;  // first r scales, revalidated
  std::string str() const;                        // "(1,2,4,8)"

  bool operator==(const ExponentSequence& other) const { return m_ == other.m_; }

 private:
  explicit ExponentSequence(std::vector<std::int64_t> m) : m_(std::move(m)) {}
  std::vector<std::int64_t> m_;
};

// r_0(t): +1 on [0, 1/2] mod 1, -1 on (1/2, 1) mod 1. The closed left half
// matters only on a null set; all set machinery below uses half-open cells.
int rademacher(const DyadicScalar& t);
// sum over j of r_0(t / 2^(m_j)); the rare set is where this equals k.
int rademacher_sum(const DyadicScalar& t, const ExponentSequence& seq);
bool member_by_rademacher(const DyadicScalar& t, const ExponentSequence& seq);

// A modulus-constraint set over [0, 2^domain_log2):
//     { t : (t mod 2^e) < 2^(e-1) for every scale e }.
// On unit cells this is exactly "bit (e-1) of the cell index is zero", which
// is what both engines implement. The full rare set Y_k is the instance with
// scales {m_1, ..., m_k}; unions of translate families yield instances with
// scale subsets. Instances are immutable and safe to share across threads.
class RareSet1D {
 public:
  static constexpr std::int64_t kBitsetCapLog2 = 24;       // dense engine hard cap
  static constexpr std::int64_t kAutoCrossCheckLog2 = 16;  // dense raster kept below this

  static RareSet1D from_sequence(const ExponentSequence& seq);
  static RareSet1D constraint_set(std::int64_t domain_log2,
                                  std::vector<std::int64_t> scales);

  std::int64_t domain_log2() const { return domain_log2_; }
  const std::vector<std::int64_t>& scales() const { return scales_; }
  // Set when this instance is a full rare set rather than a derived union.
  const std::optional<ExponentSequence>& sequence() const { return seq_; }

  // 2^(domain_log2 - #scales): each scale halves the set independently.
  DyadicScalar measure() const;

  // Exact cell counts via a most-significant-first walk of `limit`.
  BigInt cells_below(const BigInt& limit) const;
  BigInt cells_in(const BigInt& lo, const BigInt& hi) const;
  bool contains_cell(const BigInt& cell) const;
  bool contains(const DyadicScalar& point) const;  // half-open cell convention

  bool bitset_available() const { return domain_log2_ <= kBitsetCapLog2; }
  // Cached dense raster; present exactly when domain_log2 <= 16.
  const CellBitset& bitset() const;
  CellBitset rasterize() const;     // up to the hard cap, computed on demand
  std::string bitset_hex() const;   // domain_log2 <= 16

  RareSet1D intersect(const RareSet1D& other) const;
  bool is_superset_of(const RareSet1D& other) const;

 private:
  RareSet1D(std::int64_t domain_log2, std::vector<std::int64_t> scales,
            std::optional<ExponentSequence> seq);

  std::int64_t domain_log2_;
  std::vector<std::int64_t> scales_;  // sorted, distinct, within [1, domain]
  std::optional<ExponentSequence> seq_;
  std::optional<CellBitset> cells_;   // eager when domain_log2 <= 16
};

RareSet1D build_rare_set(const ExponentSequence& seq);

// Exact average of the indicator over a dyadic interval with integer
// endpoints inside the domain.
DyadicScalar average_over(const RareSet1D& set, const DyadicInterval& interval);

// One digit window of a translate-offset layout: `width` index bits placed
// at bit `position` of the offset.
struct BitField {
  std::int64_t position = 0;
  std::int64_t width = 0;
};

// A family of pairwise disjoint translates of a length-2^block_length_log2
// interval. Offsets are indexed: they either live in a materialized list
// (count <= 2^20) or are decoded on demand from the bit-field layout.
class TranslateList {
 public:
  static constexpr std::int64_t kEnumerationCapLog2 = 20;

  static TranslateList from_fields(std::int64_t block_length_log2,
                                   std::vector<BitField> fields);
  // Direct offsets; used by tests to build corrupted fixtures.
  static TranslateList from_offsets(std::int64_t block_length_log2,
                                    std::vector<BigInt> offsets);

  std::int64_t block_length_log2() const { return block_length_log2_; }
  const BigInt& count() const { return count_; }
  bool materialized() const { return offsets_.has_value(); }
  const std::vector<BigInt>& offsets() const;  // materialized only

  BigInt offset(const BigInt& index) const;
  DyadicScalar offset_scalar(const BigInt& index) const {
    return DyadicScalar(offset(index));
  }

  // Layout path: digit windows are pairwise disjoint and sit entirely at or
  // above the block length, so distinct indices give distinct multiples of
  // the block length. Materialized path: sort and scan, exhaustive.
  bool pairwise_disjoint() const;

 private:
  TranslateList() = default;
  std::int64_t block_length_log2_ = 0;
  std::vector<BitField> fields_;
  BigInt count_;
  std::optional<std::vector<BigInt>> offsets_;
};

// Translated copies of Y_r composing Y_k: offsets sum l_i * 2^(m_i) over
// i = r..k-1 with 0 <= l_i < 2^(m_{i+1} - m_i - 1).
TranslateList decompose_into_copies(const RareSet1D& set, std::int64_t r);

// Pairwise disjoint translates of [0, 2^(m_j)) over each of which the rare
// set averages to exactly 2^(-j); their union is the constraint set with
// scales {m_{j+1}, ..., m_k}.
TranslateList level_translates(const RareSet1D& set, std::int64_t j);
RareSet1D level_translates_union(const RareSet1D& set, std::int64_t j);

// Pairwise disjoint intervals of length 2^(m_{k-j+1} - m_j) over each of
// which the rare set averages to exactly 2^(j-k); their union is the
// constraint set with scales {m_{k-j+1}, ..., m_k}.
TranslateList long_intervals(const RareSet1D& set, std::int64_t j);
RareSet1D long_intervals_union(const RareSet1D& set, std::int64_t j);

// Sampled-or-exhaustive verification that every translate really averages
// to `expected`: all members when the list is materialized, `samples`
// deterministic picks otherwise. Throws EngineDisagreement on a miss.
void verify_translate_averages(const RareSet1D& set, const TranslateList& translates,
                               const DyadicScalar& expected, std::uint64_t samples,
                               std::uint64_t seed);

}  // namespace rarebasis
