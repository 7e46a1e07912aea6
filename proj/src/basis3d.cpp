#include "rarebasis/basis3d.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "rarebasis/errors.hpp"

namespace rarebasis {
namespace {

// Greedy doubling chain: the smallest scale, then repeatedly the smallest
// scale at least twice the last. An exchange argument shows no doubling
// chain in the pool is longer.
std::vector<std::int64_t> greedy_chain(const std::vector<std::int64_t>& pool) {
  std::vector<std::int64_t> chain;
  std::int64_t need = 1;
  for (const std::int64_t s : pool) {
    if (s >= need) {
      chain.push_back(s);
      need = 2 * s;
    }
  }
  return chain;
}

}  // namespace

BasisSpec BasisSpec::all_from(std::int64_t first) {
  if (first < 1) throw ValidationError("scale exponents start at 1");
  if (first > ExponentSequence::kMaxExponent) {
    throw ValidationError("starting scale " + std::to_string(first) + " exceeds the cap " +
                          std::to_string(ExponentSequence::kMaxExponent));
  }
  BasisSpec spec;
  spec.first_ = first;
  return spec;
}

BasisSpec BasisSpec::finite(std::vector<std::int64_t> scales) {
  if (scales.empty()) throw ValidationError("finite scale pool is empty");
  std::sort(scales.begin(), scales.end());
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] < 1) {
      throw ValidationError("scale exponents must be >= 1, got " +
                            std::to_string(scales[i]));
    }
    if (scales[i] > ExponentSequence::kMaxExponent) {
      throw ValidationError("scale exponent " + std::to_string(scales[i]) +
                            " exceeds the cap " +
                            std::to_string(ExponentSequence::kMaxExponent));
    }
    if (i > 0 && scales[i] == scales[i - 1]) {
      throw ValidationError("duplicate scale exponent " + std::to_string(scales[i]));
    }
  }
  BasisSpec spec;
  spec.scales_ = std::move(scales);
  return spec;
}

const std::vector<std::int64_t>& BasisSpec::scales() const {
  if (!scales_) throw ValidationError("unbounded scale pool has no explicit list");
  return *scales_;
}

std::optional<std::int64_t> BasisSpec::capacity() const {
  if (!scales_) return std::nullopt;
  return static_cast<std::int64_t>(greedy_chain(*scales_).size());
}

ExponentSequence BasisSpec::doubling_subsequence(std::int64_t k) const {
  if (k < 1) throw ValidationError("construction depth must be >= 1");
  if (scales_) {
    std::vector<std::int64_t> chain = greedy_chain(*scales_);
    const std::int64_t depth = static_cast<std::int64_t>(chain.size());
    if (depth < k) {
      throw CapacityError("scale pool " + describe() + " supports depth " +
                              std::to_string(depth) + ", not the requested " +
                              std::to_string(k),
                          depth);
    }
    chain.resize(static_cast<std::size_t>(k));
    return ExponentSequence::create(std::move(chain));
  }
  std::vector<std::int64_t> chain;
  chain.reserve(static_cast<std::size_t>(k));
  std::int64_t m = first_;
  for (std::int64_t j = 0; j < k; ++j) {
    chain.push_back(m);
    if (j + 1 < k) {
      if (m > ExponentSequence::kMaxExponent / 2) {
        throw ValidationError("depth " + std::to_string(k) + " from scale " +
                              std::to_string(first_) + " exceeds the exponent cap " +
                              std::to_string(ExponentSequence::kMaxExponent));
      }
      m *= 2;
    }
  }
  return ExponentSequence::create(std::move(chain));
}

std::string BasisSpec::describe() const {
  if (!scales_) return "all integer scales >= " + std::to_string(first_);
  std::ostringstream out;
  out << "{";
  for (std::size_t i = 0; i < scales_->size(); ++i) {
    if (i) out << ",";
    out << (*scales_)[i];
  }
  out << "}";
  return out.str();
}

Crystal3D Crystal3D::build(const ExponentSequence& seq) {
  return Crystal3D{Crystal2D::build(seq)};
}

LiftResult lift_rect(const Crystal3D& crystal, const DyadicRect& rect, std::int64_t r) {
  const std::int64_t k = crystal.base.seq.k();
  if (r < 1 || r > k) {
    throw DomainError("cylinder scale r = " + std::to_string(r) + " outside 1.." +
                      std::to_string(k));
  }
  const DyadicScalar plane = rect_average(crystal.base, rect);
  return LiftResult{Cylinder{rect, k - r}, plane.mul_pow2(r - k)};
}

BigInt copy_count(const ExponentSequence& seq, std::int64_t r) {
  const std::int64_t k = seq.k();
  if (r < 1 || r > k) {
    throw DomainError("copy scale r = " + std::to_string(r) + " outside 1.." +
                      std::to_string(k));
  }
  return BigInt(1) << (2 * (seq.m_k() - seq.m(r) - (k - r)));
}

SlabRecord slab_contribution(const ExponentSequence& seq, std::int64_t r, EngineMode mode,
                             const ParallelOptions& par, const VerifyOptions& verify) {
  const std::int64_t k = seq.k();
  const std::int64_t mk = seq.m_k();
  if (r < 1 || r > k) {
    throw DomainError("slab scale r = " + std::to_string(r) + " outside 1.." +
                      std::to_string(k));
  }
  ExponentSequence pre = [&] {
    try {
      return seq.prefix(r);
    } catch (const ValidationError& e) {
      throw ValidationError("depth-" + std::to_string(r) + " prefix of " + seq.str() +
                            " is not usable: " + e.what());
    }
  }();

  const Crystal2D full = Crystal2D::build(seq);
  const TranslateList copies1d = decompose_into_copies(full.axis, r);
  const BigInt copies = copies1d.count() * copies1d.count();
  if (copies != copy_count(seq, r)) {
    throw EngineDisagreement("copy count at scale " + std::to_string(r) + ": " +
                             copies.str() + " vs " + copy_count(seq, r).str() +
                             " expected");
  }

  const Crystal2D prefix_crystal = Crystal2D::build(pre);
  const CrystalCertificate sub = certify_crystal(prefix_crystal, mode, par, verify);

  // Spot-check one translated copy: a depth-r family rectangle, moved by the
  // last copy offset, must average 2^(-r) in the full crystal and 2^(-k)
  // once lifted to its cylinder.
  {
    const RectFamily fam = build_rect_family(prefix_crystal, 1);
    const DyadicRect rect = fam.member(BigInt(0));
    const DyadicScalar shift = copies1d.offset_scalar(copies1d.count() - 1);
    const DyadicRect moved{rect.x_left + shift, rect.y_left + shift, rect.width_log2,
                           rect.height_log2};
    if (rect_average(full, moved) != DyadicScalar::pow2(-r)) {
      throw EngineDisagreement("translated depth-" + std::to_string(r) +
                               " rectangle misses average 2^-" + std::to_string(r));
    }
    const LiftResult lift = lift_rect(Crystal3D{full}, moved, r);
    if (lift.cylinder.z_length_log2 != k - r ||
        lift.average != DyadicScalar::pow2(-k)) {
      throw EngineDisagreement("cylinder over the depth-" + std::to_string(r) +
                               " rectangle misses average 2^-" + std::to_string(k));
    }
  }

  const DyadicScalar contribution =
      (DyadicScalar(copies) * sub.half_fill_bound).mul_pow2(k - r - 1);
  const DyadicScalar want =
      DyadicScalar::scaled(BigInt((r + 3) / 4), 2 * mk - k - 2);
  if (contribution != want) {
    throw EngineDisagreement("slab contribution at scale " + std::to_string(r) + ": " +
                             contribution.str() + " vs " + want.str() + " expected");
  }
  const DyadicScalar floor_bound = DyadicScalar::scaled(BigInt(r), 2 * mk - k - 4);
  if (contribution < floor_bound) {
    throw EngineDisagreement("slab contribution at scale " + std::to_string(r) +
                             " falls below its floor " + floor_bound.str());
  }
  return SlabRecord{r,    copies,      sub.half_fill_bound, k - r - 1,
                    contribution, floor_bound, sub.cross_checked};
}

BasisCertificate certify_basis(const ExponentSequence& seq, EngineMode mode,
                               const ParallelOptions& par, const VerifyOptions& verify) {
  const std::int64_t k = seq.k();
  const std::int64_t mk = seq.m_k();

  std::vector<SlabRecord> slabs;
  slabs.reserve(static_cast<std::size_t>(k));
  DyadicScalar total;
  BigInt quarters = 0;  // sum of ceil(r/4)
  bool cross = true;
  for (std::int64_t r = 1; r <= k; ++r) {
    SlabRecord rec = slab_contribution(seq, r, mode, par, verify);
    if (!slabs.empty() && rec.slab_bottom_log2 >= slabs.back().slab_bottom_log2) {
      throw EngineDisagreement("slabs are not disjoint in z at scale " +
                               std::to_string(r));
    }
    total += rec.contribution;
    quarters += (r + 3) / 4;
    cross = cross && rec.cross_checked;
    slabs.push_back(std::move(rec));
  }

  const DyadicScalar want_total = DyadicScalar::scaled(quarters, 2 * mk - k - 2);
  if (total != want_total) {
    throw EngineDisagreement("slab total: " + total.str() + " vs " + want_total.str() +
                             " expected");
  }
  const DyadicScalar required = DyadicScalar::scaled(BigInt(k) * k, 2 * mk - k - 5);
  const bool pass = total >= required;
  return BasisCertificate{seq, k, std::move(slabs), total, required, pass, cross};
}

BasisCertificate certify_basis(const BasisSpec& spec, std::int64_t k, EngineMode mode,
                               const ParallelOptions& par, const VerifyOptions& verify) {
  return certify_basis(spec.doubling_subsequence(k), mode, par, verify);
}

}  // namespace rarebasis
