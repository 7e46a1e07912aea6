#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rarebasis {

// Dense bitmap over the unit cells [n, n+1) of [0, 2^size_log2). Cell n is
// "in" when bit n is set. This is the exhaustive engine: quadratic-ish and
// memory-hungry, used to cross-check the symbolic engine on small domains.
class CellBitset {
 public:
  static constexpr std::int64_t kMaxSizeLog2 = 26;

  explicit CellBitset(std::int64_t size_log2);

  // Cells n with bit (e-1) of n clear for every scale e in `scales`; this is
  // the raster of the modulus-constraint set with those scales.
  static CellBitset from_scales(std::int64_t domain_log2,
                                const std::vector<std::int64_t>& scales);

  std::int64_t size_log2() const { return size_log2_; }
  std::uint64_t size() const { return std::uint64_t{1} << size_log2_; }

  bool test(std::uint64_t cell) const {
    return (words_[cell >> 6] >> (cell & 63)) & 1u;
  }
  void set(std::uint64_t cell) { words_[cell >> 6] |= std::uint64_t{1} << (cell & 63); }

  std::uint64_t count() const;
  std::uint64_t count_range(std::uint64_t lo, std::uint64_t hi) const;  // [lo, hi)

  bool operator==(const CellBitset& other) const {
    return size_log2_ == other.size_log2_ && words_ == other.words_;
  }

  // OR `other`, shifted up by `offset` cells, into this bitmap. Returns
  // false when any incoming bit was already set (overlap probe); the bits
  // are merged either way.
  bool or_shifted(const CellBitset& other, std::uint64_t offset);

  // Hex numeral of the bit array read as the integer sum of 2^cell over set
  // cells, most significant nibble first, zero-padded to the full domain
  // width (one nibble for domains of fewer than four cells).
  std::string to_hex() const;

 private:
  std::int64_t size_log2_;
  std::vector<std::uint64_t> words_;
};

}  // namespace rarebasis
