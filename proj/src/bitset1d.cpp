#include "rarebasis/bitset1d.hpp"

#include <bit>

#include "rarebasis/errors.hpp"

namespace rarebasis {

namespace {

// In-word keep-masks for "bit p of the cell index is zero", p < 6.
constexpr std::uint64_t kLowBitMask[6] = {
    0x5555555555555555ULL, 0x3333333333333333ULL, 0x0f0f0f0f0f0f0f0fULL,
    0x00ff00ff00ff00ffULL, 0x0000ffff0000ffffULL, 0x00000000ffffffffULL,
};

}  // namespace

CellBitset::CellBitset(std::int64_t size_log2) : size_log2_(size_log2) {
  if (size_log2 < 0 || size_log2 > kMaxSizeLog2) {
    throw ValidationError("cell bitmap domain 2^" + std::to_string(size_log2) +
                          " outside supported range");
  }
  const std::uint64_t cells = std::uint64_t{1} << size_log2;
  words_.assign((cells + 63) / 64, 0);
}

CellBitset CellBitset::from_scales(std::int64_t domain_log2,
                                   const std::vector<std::int64_t>& scales) {
  CellBitset out(domain_log2);
  const std::uint64_t cells = out.size();
  for (std::uint64_t wi = 0; wi < out.words_.size(); ++wi) {
    // A scale e keeps cells whose bit (e-1) is clear: a fixed in-word
    // pattern for e <= 6, a whole-word predicate on the word index above.
    std::uint64_t w = ~std::uint64_t{0};
    for (std::int64_t e : scales) {
      const std::int64_t p = e - 1;
      if (p < 6) {
        w &= kLowBitMask[p];
      } else if ((wi >> (p - 6)) & 1u) {
        w = 0;
        break;
      }
    }
    out.words_[wi] = w;
  }
  if (cells < 64) out.words_[0] &= (std::uint64_t{1} << cells) - 1;
  return out;
}

std::uint64_t CellBitset::count() const {
  std::uint64_t total = 0;
  for (std::uint64_t w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

std::uint64_t CellBitset::count_range(std::uint64_t lo, std::uint64_t hi) const {
  if (lo >= hi) return 0;
  const std::uint64_t wl = lo >> 6;
  const std::uint64_t wh = (hi - 1) >> 6;
  const std::uint64_t head = ~std::uint64_t{0} << (lo & 63);
  const std::uint64_t tail = ~std::uint64_t{0} >> (63 - ((hi - 1) & 63));
  if (wl == wh) {
    return static_cast<std::uint64_t>(std::popcount(words_[wl] & head & tail));
  }
  std::uint64_t total = static_cast<std::uint64_t>(std::popcount(words_[wl] & head));
  for (std::uint64_t wi = wl + 1; wi < wh; ++wi) {
    total += static_cast<std::uint64_t>(std::popcount(words_[wi]));
  }
  total += static_cast<std::uint64_t>(std::popcount(words_[wh] & tail));
  return total;
}

bool CellBitset::or_shifted(const CellBitset& other, std::uint64_t offset) {
  bool disjoint = true;
  for (std::uint64_t wi = 0; wi < other.words_.size(); ++wi) {
    std::uint64_t w = other.words_[wi];
    while (w != 0) {
      const int b = std::countr_zero(w);
      w &= w - 1;
      const std::uint64_t cell = (wi << 6) + static_cast<std::uint64_t>(b) + offset;
      if (cell >= size()) throw DomainError("shifted cell outside bitmap domain");
      if (test(cell)) disjoint = false;
      set(cell);
    }
  }
  return disjoint;
}

std::string CellBitset::to_hex() const {
  const std::uint64_t cells = size();
  const std::uint64_t nibbles = cells >= 4 ? cells / 4 : 1;
  std::string out(nibbles, '0');
  static const char* digits = "0123456789abcdef";
  for (std::uint64_t i = 0; i < nibbles; ++i) {
    const std::uint64_t base = i * 4;
    unsigned v = 0;
    for (unsigned b = 0; b < 4; ++b) {
      const std::uint64_t cell = base + b;
      if (cell < cells && test(cell)) v |= 1u << b;
    }
    out[nibbles - 1 - i] = digits[v];
  }
  return out;
}

}  // namespace rarebasis
