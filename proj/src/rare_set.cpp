#include "rarebasis/rare_set.hpp"

#include <algorithm>
#include <sstream>

#include "rarebasis/errors.hpp"
#include "rarebasis/parallel.hpp"

namespace rarebasis {

namespace {

// `width` deterministic pseudo-random bits for draw number `draw`.
BigInt random_bits(std::int64_t width, std::uint64_t seed, std::uint64_t draw) {
  BigInt out = 0;
  const std::int64_t chunks = (width + 63) / 64;
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::uint64_t word =
        splitmix64(seed ^ (draw * 0x9e3779b97f4a7c15ULL) ^ static_cast<std::uint64_t>(c));
    out |= BigInt(word) << static_cast<unsigned>(64 * c);
  }
  const std::int64_t extra = 64 * chunks - width;
  if (extra > 0) out >>= static_cast<unsigned>(extra);
  return out;
}

}  // namespace

// ===== ExponentSequence =====

ExponentSequence ExponentSequence::create(std::vector<std::int64_t> exponents) {
  if (exponents.empty()) throw ValidationError("scale sequence is empty");
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] < 1) {
      throw ValidationError("scale exponents must be >= 1, got " +
                            std::to_string(exponents[i]));
    }
    if (exponents[i] > kMaxExponent) {
      throw ValidationError("scale exponent " + std::to_string(exponents[i]) +
                            " exceeds the cap " + std::to_string(kMaxExponent));
    }
    if (i > 0 && exponents[i] <= exponents[i - 1]) {
      throw ValidationError("scale exponents must be strictly increasing: m_" +
                            std::to_string(i) + " = " + std::to_string(exponents[i - 1]) +
                            ", m_" + std::to_string(i + 1) + " = " +
                            std::to_string(exponents[i]));
    }
  }
  const std::int64_t k = static_cast<std::int64_t>(exponents.size());
  for (std::int64_t j = 1; 2 * j <= k; ++j) {
    const std::int64_t lhs = exponents[static_cast<std::size_t>(k - j - 1)];
    const std::int64_t hi = exponents[static_cast<std::size_t>(k - j)];
    const std::int64_t lo = exponents[static_cast<std::size_t>(j - 1)];
    if (lhs > hi - lo) {
      std::ostringstream msg;
      msg << "inadmissible sequence: nesting inequality fails at j = " << j << ": m_"
          << (k - j) << " = " << lhs << " > m_" << (k - j + 1) << " - m_" << j << " = "
          << (hi - lo);
      throw ValidationError(msg.str());
    }
  }
  return ExponentSequence(std::move(exponents));
}

std::int64_t ExponentSequence::m(std::int64_t j) const {
  if (j < 1 || j > k()) {
    throw DomainError("scale index " + std::to_string(j) + " outside 1.." +
                      std::to_string(k()));
  }
  return m_[static_cast<std::size_t>(j - 1)];
}

bool ExponentSequence::is_doubling() const {
  for (std::size_t i = 0; i + 1 < m_.size(); ++i) {
    if (2 * m_[i] > m_[i + 1]) return false;
  }
  return true;
}

ExponentSequence ExponentSequence::prefix(std::int64_t r) const {
  if (r < 1 || r > k()) {
    throw DomainError("prefix length " + std::to_string(r) + " outside 1.." +
                      std::to_string(k()));
  }
  return create(std::vector<std::int64_t>(m_.begin(), m_.begin() + r));
}

std::string ExponentSequence::str() const {
  std::string out = "(";
  for (std::size_t i = 0; i < m_.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(m_[i]);
  }
  return out + ")";
}

// ===== Rademacher membership =====

int rademacher(const DyadicScalar& t) {
  const DyadicScalar frac = t - DyadicScalar(t.floor_value());
  static const DyadicScalar half = DyadicScalar::pow2(-1);
  return frac <= half ? 1 : -1;
}

int rademacher_sum(const DyadicScalar& t, const ExponentSequence& seq) {
  int sum = 0;
  for (std::int64_t e : seq.exponents()) sum += rademacher(t.mul_pow2(-e));
  return sum;
}

bool member_by_rademacher(const DyadicScalar& t, const ExponentSequence& seq) {
  return rademacher_sum(t, seq) == static_cast<int>(seq.k());
}

// ===== RareSet1D =====

RareSet1D::RareSet1D(std::int64_t domain_log2, std::vector<std::int64_t> scales,
                     std::optional<ExponentSequence> seq)
    : domain_log2_(domain_log2), scales_(std::move(scales)), seq_(std::move(seq)) {
  if (domain_log2_ < 0) throw ValidationError("negative domain size");
  std::sort(scales_.begin(), scales_.end());
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (scales_[i] < 1 || scales_[i] > domain_log2_) {
      throw ValidationError("constraint scale " + std::to_string(scales_[i]) +
                            " outside domain 2^" + std::to_string(domain_log2_));
    }
    if (i > 0 && scales_[i] == scales_[i - 1]) {
      // The product measure rule needs independent halvings, one per scale.
      throw ValidationError("duplicate constraint scale " + std::to_string(scales_[i]));
    }
  }
  if (domain_log2_ <= kAutoCrossCheckLog2) {
    cells_ = CellBitset::from_scales(domain_log2_, scales_);
  }
}

RareSet1D RareSet1D::from_sequence(const ExponentSequence& seq) {
  return RareSet1D(seq.m_k(), seq.exponents(), seq);
}

RareSet1D RareSet1D::constraint_set(std::int64_t domain_log2,
                                    std::vector<std::int64_t> scales) {
  return RareSet1D(domain_log2, std::move(scales), std::nullopt);
}

DyadicScalar RareSet1D::measure() const {
  return DyadicScalar::pow2(domain_log2_ - static_cast<std::int64_t>(scales_.size()));
}

BigInt RareSet1D::cells_below(const BigInt& limit) const {
  if (limit <= 0) return BigInt(0);
  std::vector<char> forced(static_cast<std::size_t>(domain_log2_), 0);
  for (std::int64_t e : scales_) forced[static_cast<std::size_t>(e - 1)] = 1;
  std::vector<std::int64_t> free_below(static_cast<std::size_t>(domain_log2_) + 1, 0);
  for (std::int64_t b = 0; b < domain_log2_; ++b) {
    free_below[static_cast<std::size_t>(b + 1)] =
        free_below[static_cast<std::size_t>(b)] + (forced[static_cast<std::size_t>(b)] ? 0 : 1);
  }
  const BigInt cap = BigInt(1) << static_cast<unsigned>(domain_log2_);
  if (limit >= cap) {
    return BigInt(1) << static_cast<unsigned>(free_below[static_cast<std::size_t>(domain_log2_)]);
  }
  // Walk the bits of `limit` from the top. Branching below a set bit frees
  // all lower non-forced positions; staying on the equal track past a set
  // forced bit is impossible, so the walk stops there.
  BigInt count = 0;
  for (std::int64_t b = domain_log2_ - 1; b >= 0; --b) {
    if (boost::multiprecision::bit_test(limit, static_cast<unsigned>(b))) {
      count += BigInt(1) << static_cast<unsigned>(free_below[static_cast<std::size_t>(b)]);
      if (forced[static_cast<std::size_t>(b)]) return count;
    }
  }
  return count;
}

BigInt RareSet1D::cells_in(const BigInt& lo, const BigInt& hi) const {
  if (hi <= lo) return BigInt(0);
  return cells_below(hi) - cells_below(lo);
}

bool RareSet1D::contains_cell(const BigInt& cell) const {
  if (cell < 0 || cell >= (BigInt(1) << static_cast<unsigned>(domain_log2_))) {
    throw DomainError("cell outside domain");
  }
  for (std::int64_t e : scales_) {
    if (boost::multiprecision::bit_test(cell, static_cast<unsigned>(e - 1))) return false;
  }
  return true;
}

bool RareSet1D::contains(const DyadicScalar& point) const {
  if (point.sign() < 0) throw DomainError("point below domain");
  return contains_cell(point.floor_value());
}

const CellBitset& RareSet1D::bitset() const {
  if (!cells_) {
    throw DomainError("dense raster cached only for domains <= 2^" +
                      std::to_string(kAutoCrossCheckLog2) + "; use rasterize()");
  }
  return *cells_;
}

CellBitset RareSet1D::rasterize() const {
  if (domain_log2_ > kBitsetCapLog2) {
    throw ValidationError("dense engine capped at domain 2^" +
                          std::to_string(kBitsetCapLog2));
  }
  if (cells_) return *cells_;
  return CellBitset::from_scales(domain_log2_, scales_);
}

std::string RareSet1D::bitset_hex() const {
  if (domain_log2_ > kAutoCrossCheckLog2) {
    throw ValidationError("hex export limited to domains <= 2^" +
                          std::to_string(kAutoCrossCheckLog2));
  }
  return bitset().to_hex();
}

RareSet1D RareSet1D::intersect(const RareSet1D& other) const {
  if (domain_log2_ != other.domain_log2_) {
    throw ValidationError("intersecting sets over different domains");
  }
  std::vector<std::int64_t> merged = scales_;
  merged.insert(merged.end(), other.scales_.begin(), other.scales_.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return RareSet1D(domain_log2_, std::move(merged), std::nullopt);
}

bool RareSet1D::is_superset_of(const RareSet1D& other) const {
  if (domain_log2_ != other.domain_log2_) return false;
  // Fewer constraints = bigger set: we contain `other` iff our scales are a
  // subset of theirs.
  return std::includes(other.scales_.begin(), other.scales_.end(), scales_.begin(),
                       scales_.end());
}

RareSet1D build_rare_set(const ExponentSequence& seq) {
  return RareSet1D::from_sequence(seq);
}

DyadicScalar average_over(const RareSet1D& set, const DyadicInterval& interval) {
  if (interval.length_log2 < 0) {
    throw DomainError("interval endpoints must sit on the unit-cell grid");
  }
  if (!interval.left.is_integer() || interval.left.sign() < 0) {
    throw DomainError("interval left endpoint must be a nonnegative integer");
  }
  const BigInt lo = interval.left.to_integer();
  const BigInt hi = lo + (BigInt(1) << static_cast<unsigned>(interval.length_log2));
  if (hi > (BigInt(1) << static_cast<unsigned>(set.domain_log2()))) {
    throw DomainError("interval extends past the domain");
  }
  return DyadicScalar(set.cells_in(lo, hi), interval.length_log2);
}

// ===== TranslateList =====

TranslateList TranslateList::from_fields(std::int64_t block_length_log2,
                                         std::vector<BitField> fields) {
  TranslateList out;
  out.block_length_log2_ = block_length_log2;
  std::vector<BitField> kept;
  for (const BitField& f : fields) {
    if (f.width < 0 || f.position < 0) throw ValidationError("malformed offset layout");
    if (f.width > 0) kept.push_back(f);
  }
  std::sort(kept.begin(), kept.end(),
            [](const BitField& a, const BitField& b) { return a.position < b.position; });
  std::int64_t total_width = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i].position < block_length_log2) {
      throw ValidationError("offset digit window below the block length");
    }
    if (i > 0 && kept[i - 1].position + kept[i - 1].width > kept[i].position) {
      throw ValidationError("overlapping offset digit windows");
    }
    total_width += kept[i].width;
  }
  out.fields_ = std::move(kept);
  out.count_ = BigInt(1) << static_cast<unsigned>(total_width);
  if (total_width <= kEnumerationCapLog2) {
    std::vector<BigInt> offsets;
    const std::uint64_t n = std::uint64_t{1} << total_width;
    offsets.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      BigInt off = 0;
      std::int64_t consumed = 0;
      for (const BitField& f : out.fields_) {
        const std::uint64_t digits = (i >> consumed) & ((std::uint64_t{1} << f.width) - 1);
        off |= BigInt(digits) << static_cast<unsigned>(f.position);
        consumed += f.width;
      }
      offsets.push_back(std::move(off));
    }
    out.offsets_ = std::move(offsets);
  }
  return out;
}

TranslateList TranslateList::from_offsets(std::int64_t block_length_log2,
                                          std::vector<BigInt> offsets) {
  TranslateList out;
  out.block_length_log2_ = block_length_log2;
  out.count_ = static_cast<std::int64_t>(offsets.size());
  out.offsets_ = std::move(offsets);
  return out;
}

const std::vector<BigInt>& TranslateList::offsets() const {
  if (!offsets_) throw ValidationError("offset list not materialized (symbolic family)");
  return *offsets_;
}

BigInt TranslateList::offset(const BigInt& index) const {
  if (index < 0 || index >= count_) throw DomainError("translate index out of range");
  if (offsets_) {
    return (*offsets_)[index.convert_to<std::size_t>()];
  }
  BigInt off = 0;
  std::int64_t consumed = 0;
  for (const BitField& f : fields_) {
    const BigInt digits =
        (index >> static_cast<unsigned>(consumed)) & ((BigInt(1) << f.width) - 1);
    off |= digits << static_cast<unsigned>(f.position);
    consumed += f.width;
  }
  return off;
}

bool TranslateList::pairwise_disjoint() const {
  if (offsets_) {
    std::vector<BigInt> sorted = *offsets_;
    std::sort(sorted.begin(), sorted.end());
    const BigInt gap = BigInt(1) << static_cast<unsigned>(block_length_log2_);
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] - sorted[i - 1] < gap) return false;
    }
    return true;
  }
  // Layout path: the constructor already rejected windows that overlap or
  // dip below the block length, which is the full disjointness argument.
  for (std::size_t i = 0; i < fields_.size(); ++i) {
    if (fields_[i].position < block_length_log2_) return false;
    if (i > 0 && fields_[i - 1].position + fields_[i - 1].width > fields_[i].position) {
      return false;
    }
  }
  return true;
}

// ===== translate families =====

namespace {

const ExponentSequence& require_sequence(const RareSet1D& set, const char* op) {
  if (!set.sequence()) {
    throw ValidationError(std::string(op) + " needs a full rare set, not a derived union");
  }
  return *set.sequence();
}

// Digit windows for offsets sum l_i * 2^(m_i), i = first..k-1.
std::vector<BitField> upper_digit_fields(const ExponentSequence& seq, std::int64_t first) {
  std::vector<BitField> fields;
  for (std::int64_t i = first; i <= seq.k() - 1; ++i) {
    fields.push_back(BitField{seq.m(i), seq.m(i + 1) - seq.m(i) - 1});
  }
  return fields;
}

}  // namespace

TranslateList decompose_into_copies(const RareSet1D& set, std::int64_t r) {
  const ExponentSequence& seq = require_sequence(set, "decompose_into_copies");
  if (r < 1 || r > seq.k()) throw DomainError("copy scale index out of range");
  TranslateList out = TranslateList::from_fields(seq.m(r), upper_digit_fields(seq, r));
  const BigInt expected = BigInt(1)
                          << static_cast<unsigned>(seq.m_k() - seq.m(r) - (seq.k() - r));
  if (out.count() != expected) {
    throw EngineDisagreement("copy count does not telescope");
  }
  return out;
}

TranslateList level_translates(const RareSet1D& set, std::int64_t j) {
  const ExponentSequence& seq = require_sequence(set, "level_translates");
  if (j < 1 || j > seq.k()) throw DomainError("translate level out of range");
  return TranslateList::from_fields(seq.m(j), upper_digit_fields(seq, j));
}

RareSet1D level_translates_union(const RareSet1D& set, std::int64_t j) {
  const ExponentSequence& seq = require_sequence(set, "level_translates_union");
  if (j < 1 || j > seq.k()) throw DomainError("translate level out of range");
  std::vector<std::int64_t> scales(seq.exponents().begin() + j, seq.exponents().end());
  return RareSet1D::constraint_set(seq.m_k(), std::move(scales));
}

static std::int64_t max_long_interval_level(const ExponentSequence& seq) {
  const std::int64_t k = seq.k();
  return std::max((k + 3) / 4, k / 2);
}

TranslateList long_intervals(const RareSet1D& set, std::int64_t j) {
  const ExponentSequence& seq = require_sequence(set, "long_intervals");
  const std::int64_t k = seq.k();
  if (j < 1 || j > max_long_interval_level(seq)) {
    throw DomainError("long-interval level out of range");
  }
  const std::int64_t length_log2 = seq.m(k - j + 1) - seq.m(j);
  // Tiles of the left half of each scale-(k-j+1) block, then the usual
  // higher digit windows selecting which blocks carry the set.
  std::vector<BitField> fields = upper_digit_fields(seq, k - j + 1);
  fields.push_back(BitField{length_log2, seq.m(j) - 1});
  TranslateList out = TranslateList::from_fields(length_log2, std::move(fields));
  const BigInt expected =
      BigInt(1) << static_cast<unsigned>(seq.m(j) + seq.m_k() - seq.m(k - j + 1) - j);
  if (out.count() != expected) {
    throw EngineDisagreement("long-interval count does not telescope");
  }
  return out;
}

RareSet1D long_intervals_union(const RareSet1D& set, std::int64_t j) {
  const ExponentSequence& seq = require_sequence(set, "long_intervals_union");
  const std::int64_t k = seq.k();
  if (j < 1 || j > max_long_interval_level(seq)) {
    throw DomainError("long-interval level out of range");
  }
  std::vector<std::int64_t> scales(seq.exponents().end() - j, seq.exponents().end());
  return RareSet1D::constraint_set(seq.m_k(), std::move(scales));
}

void verify_translate_averages(const RareSet1D& set, const TranslateList& translates,
                               const DyadicScalar& expected, std::uint64_t samples,
                               std::uint64_t seed) {
  const std::int64_t len = translates.block_length_log2();
  const auto check_index = [&](const BigInt& idx) {
    const BigInt off = translates.offset(idx);
    const DyadicScalar avg =
        average_over(set, DyadicInterval{DyadicScalar(off), len});
    if (!(avg == expected)) {
      throw EngineDisagreement("translate at index " + idx.str() +
                               " averages " + avg.str() + ", expected " + expected.str());
    }
  };
  if (translates.materialized()) {
    const BigInt n = translates.count();
    for (BigInt i = 0; i < n; ++i) check_index(i);
    return;
  }
  // Symbolic family: count is a power of two, so unbiased index draws are
  // just fixed-width random bit strings.
  const std::int64_t width =
      static_cast<std::int64_t>(boost::multiprecision::msb(translates.count()));
  for (std::uint64_t s = 0; s < samples; ++s) {
    check_index(random_bits(width, seed, s));
  }
}

}  // namespace rarebasis
