#include "rarebasis/crystal2d.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <string>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "rarebasis/errors.hpp"

namespace rarebasis {
namespace {

// Deterministic draw from [0, bound): rejection sampling over the minimal
// bit width, chunked from the stateless stream. Identical for every worker
// count because `draw` advances on the calling thread only.
BigInt random_below(const BigInt& bound, std::uint64_t seed, std::uint64_t& draw) {
  if (bound <= 1) return BigInt(0);
  const std::size_t width = boost::multiprecision::msb(BigInt(bound - 1)) + 1;
  for (;;) {
    BigInt value = 0;
    for (std::size_t lo = 0; lo < width; lo += 64) {
      value |= BigInt(splitmix64(seed + 0x9e3779b97f4a7c15ULL * ++draw)) << lo;
    }
    value &= (BigInt(1) << width) - 1;
    if (value < bound) return value;
  }
}

std::string scalar_pair(const DyadicScalar& a, const DyadicScalar& b) {
  return a.str() + " vs " + b.str();
}

// Shared evaluation context: which engine paths are active, plus the dense
// raster of the axis set when the dense path is.
struct EngineCtx {
  EngineMode mode = EngineMode::symbolic;
  bool dense = false;
  std::optional<CellBitset> axis_raster;

  DyadicScalar set_measure(const RareSet1D& set, const char* what) const {
    const DyadicScalar sym = set.measure();
    if (dense) {
      const DyadicScalar dns{BigInt(set.rasterize().count())};
      if (dns != sym) {
        throw EngineDisagreement(std::string(what) + ": dense measure " +
                                 scalar_pair(dns, sym) + " symbolic");
      }
    }
    return sym;
  }

  // Average of the axis set over [offset, offset + 2^length_log2).
  DyadicScalar axis_average(const RareSet1D& axis, const BigInt& offset,
                            std::int64_t length_log2) const {
    const BigInt hi = offset + (BigInt(1) << length_log2);
    const DyadicScalar sym = DyadicScalar::scaled(axis.cells_in(offset, hi), -length_log2);
    if (dense) {
      const std::uint64_t lo_cell = offset.convert_to<std::uint64_t>();
      const std::uint64_t hi_cell = hi.convert_to<std::uint64_t>();
      const DyadicScalar dns =
          DyadicScalar::scaled(BigInt(axis_raster->count_range(lo_cell, hi_cell)), -length_log2);
      if (dns != sym) {
        throw EngineDisagreement("translate average: dense " + scalar_pair(dns, sym) +
                                 " symbolic");
      }
    }
    return sym;
  }
};

struct MemberCheck {
  const RareSet1D* axis = nullptr;
  BigInt offset;
  std::int64_t length_log2 = 0;
  DyadicScalar expected;
  std::int64_t level_j = 0;
  char axis_name = 'x';
};

// Exhaustive member verification is capped; past the cap (and for symbolic
// layouts of any size) a fixed number of deterministic picks stands in.
constexpr std::uint64_t kExhaustiveCheckCap = std::uint64_t{1} << 16;

void append_member_checks(std::vector<MemberCheck>& out, const RareSet1D& axis,
                          const TranslateList& list, const DyadicScalar& expected,
                          std::int64_t level_j, char axis_name,
                          const VerifyOptions& verify) {
  auto push = [&](const BigInt& offset) {
    out.push_back({&axis, offset, list.block_length_log2(), expected, level_j, axis_name});
  };
  if (list.materialized() && list.count() <= kExhaustiveCheckCap) {
    for (const BigInt& offset : list.offsets()) push(offset);
    return;
  }
  const std::uint64_t seed =
      verify.seed ^ splitmix64(static_cast<std::uint64_t>(level_j) * 2 + (axis_name == 'y'));
  std::uint64_t draw = 0;
  for (std::uint64_t s = 0; s < verify.samples; ++s) {
    push(list.offset(random_below(list.count(), seed, draw)));
  }
}

StaircaseResult staircase_impl(const Crystal2D& crystal, const std::vector<RectFamily>& fams,
                               const EngineCtx& ctx) {
  const std::int64_t k = crystal.seq.k();
  const std::int64_t mk = crystal.seq.m_k();
  const std::int64_t levels = static_cast<std::int64_t>(fams.size());

  StaircaseResult out;
  out.levels = levels;
  out.family_measures.resize(fams.size());
  out.overlap.assign(fams.size(), std::vector<DyadicScalar>(fams.size()));

  std::vector<DyadicScalar> mx(fams.size()), my(fams.size());
  for (std::size_t j = 0; j < fams.size(); ++j) {
    mx[j] = ctx.set_measure(fams[j].x_union, "x union");
    my[j] = ctx.set_measure(fams[j].y_union, "y union");
    const DyadicScalar mu = mx[j] * my[j];
    if (mu != fams[j].union_measure) {
      throw EngineDisagreement("family union measure at level " +
                               std::to_string(fams[j].level_j) + ": " +
                               scalar_pair(mu, fams[j].union_measure) + " recorded");
    }
    out.family_measures[j] = mu;
  }

  // The staircase decomposition needs the x unions increasing and the y
  // unions decreasing in j; both chains are scale-subset relations.
  for (std::size_t j = 1; j < fams.size(); ++j) {
    if (!fams[j].x_union.is_superset_of(fams[j - 1].x_union) ||
        !fams[j - 1].y_union.is_superset_of(fams[j].y_union)) {
      throw EngineDisagreement("staircase chain broken between levels " +
                               std::to_string(fams[j - 1].level_j) + " and " +
                               std::to_string(fams[j].level_j));
    }
  }

  DyadicScalar total;
  DyadicScalar prev_mx;
  DyadicScalar half_fill;
  for (std::size_t j = 0; j < fams.size(); ++j) {
    total += (mx[j] - prev_mx) * my[j];
    prev_mx = mx[j];
    half_fill += out.family_measures[j].mul_pow2(-1);
  }
  out.union_measure = total;
  out.half_fill_bound = half_fill;

  for (std::size_t i = 0; i < fams.size(); ++i) {
    for (std::size_t j = i; j < fams.size(); ++j) {
      const RareSet1D xi = fams[i].x_union.intersect(fams[j].x_union);
      const RareSet1D yi = fams[i].y_union.intersect(fams[j].y_union);
      const DyadicScalar mu =
          ctx.set_measure(xi, "x overlap") * ctx.set_measure(yi, "y overlap");
      const DyadicScalar want =
          DyadicScalar::pow2(2 * mk - k - static_cast<std::int64_t>(j - i));
      if (mu != want) {
        throw EngineDisagreement(
            "overlap of levels " + std::to_string(fams[i].level_j) + "," +
            std::to_string(fams[j].level_j) + ": " + scalar_pair(mu, want) + " expected");
      }
      out.overlap[i][j] = mu;
      out.overlap[j][i] = mu;
    }
  }
  return out;
}

}  // namespace

const char* engine_name(EngineMode mode) {
  switch (mode) {
    case EngineMode::bitset:
      return "bitset";
    case EngineMode::symbolic:
      return "symbolic";
    case EngineMode::both:
      return "both";
  }
  return "unknown";
}

Crystal2D Crystal2D::build(const ExponentSequence& seq) {
  return Crystal2D{seq, build_rare_set(seq)};
}

DyadicScalar Crystal2D::measure() const {
  return DyadicScalar::pow2(2 * (seq.m_k() - seq.k()));
}

DyadicScalar rect_average(const Crystal2D& crystal, const DyadicRect& rect) {
  const DyadicScalar ax =
      average_over(crystal.axis, DyadicInterval{rect.x_left, rect.width_log2});
  const DyadicScalar ay =
      average_over(crystal.axis, DyadicInterval{rect.y_left, rect.height_log2});
  return ax * ay;
}

DyadicRect RectFamily::member(const BigInt& index) const {
  if (index < 0 || index >= count) {
    throw DomainError("family member index " + index.str() + " out of range");
  }
  const BigInt yi = index % y_intervals.count();
  const BigInt xi = index / y_intervals.count();
  return DyadicRect{x_translates.offset_scalar(xi), y_intervals.offset_scalar(yi),
                    width_log2, height_log2};
}

bool RectFamily::pairwise_disjoint() const {
  return x_translates.pairwise_disjoint() && y_intervals.pairwise_disjoint();
}

RectFamily build_rect_family(const Crystal2D& crystal, std::int64_t level_j) {
  const ExponentSequence& seq = crystal.seq;
  const std::int64_t k = seq.k();
  const std::int64_t mk = seq.m_k();

  TranslateList xt = level_translates(crystal.axis, level_j);
  TranslateList yi = long_intervals(crystal.axis, level_j);
  RareSet1D xu = level_translates_union(crystal.axis, level_j);
  RareSet1D yu = long_intervals_union(crystal.axis, level_j);
  const std::int64_t width_log2 = seq.m(level_j);
  const std::int64_t height_log2 = seq.m(k - level_j + 1) - seq.m(level_j);
  const BigInt count = xt.count() * yi.count();
  const DyadicScalar union_measure = xu.measure() * yu.measure();

  const BigInt want_count = BigInt(1) << (2 * mk - seq.m(k - level_j + 1) - k);
  if (count != want_count) {
    throw EngineDisagreement("family count at level " + std::to_string(level_j) + ": " +
                             count.str() + " vs " + want_count.str() + " expected");
  }
  return RectFamily{level_j,   std::move(xt),          std::move(yi),
                    std::move(xu), std::move(yu),      width_log2,
                    height_log2,   width_log2 + height_log2, count,
                    union_measure};
}

StaircaseResult union_measure_staircase(const Crystal2D& crystal, std::int64_t levels) {
  if (levels < 1) throw ValidationError("staircase needs at least one level");
  std::vector<RectFamily> fams;
  fams.reserve(static_cast<std::size_t>(levels));
  for (std::int64_t j = 1; j <= levels; ++j) fams.push_back(build_rect_family(crystal, j));
  EngineCtx ctx;  // symbolic only
  return staircase_impl(crystal, fams, ctx);
}

DyadicScalar ProductRegion::measure_inclusion_exclusion() const {
  const std::size_t n = parts.size();
  if (n == 0) return DyadicScalar();
  if (n > 20) throw ValidationError("inclusion-exclusion over more than 20 parts");
  DyadicScalar total;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::optional<RareSet1D> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      if (!((mask >> i) & 1)) continue;
      if (!x) {
        x = parts[i].first;
        y = parts[i].second;
      } else {
        x = x->intersect(parts[i].first);
        y = y->intersect(parts[i].second);
      }
    }
    const DyadicScalar mu = x->measure() * y->measure();
    if (std::popcount(mask) % 2 == 1) {
      total += mu;
    } else {
      total -= mu;
    }
  }
  return total;
}

Raster2D::Raster2D(std::int64_t domain_log2) : domain_log2_(domain_log2) {
  if (domain_log2 < 0 || domain_log2 > kMaxDomainLog2) {
    throw ValidationError("2D raster domain 2^" + std::to_string(domain_log2) +
                          " exceeds the dense cap 2^" + std::to_string(kMaxDomainLog2));
  }
  const std::uint64_t cells = side();
  row_words_ = (cells + 63) / 64;
  words_.assign(cells * row_words_, 0);
}

void Raster2D::fill_rect(std::uint64_t x0, std::uint64_t y0, std::uint64_t w,
                         std::uint64_t h) {
  const std::uint64_t cells = side();
  if (w == 0 || h == 0 || x0 + w > cells || y0 + h > cells) {
    throw DomainError("rectangle leaves the raster domain");
  }
  for (std::uint64_t y = y0; y < y0 + h; ++y) {
    std::uint64_t* row = words_.data() + y * row_words_;
    for (std::uint64_t wi = x0 >> 6; wi <= (x0 + w - 1) >> 6; ++wi) {
      const std::uint64_t from = std::max(x0, wi << 6);
      const std::uint64_t to = std::min(x0 + w, (wi << 6) + 64);
      const std::uint64_t mask = (to - from == 64)
                                     ? ~std::uint64_t{0}
                                     : (((std::uint64_t{1} << (to - from)) - 1) << (from & 63));
      row[wi] |= mask;
    }
  }
}

bool Raster2D::test(std::uint64_t x, std::uint64_t y) const {
  return (words_[y * row_words_ + (x >> 6)] >> (x & 63)) & 1u;
}

std::uint64_t Raster2D::count() const {
  std::uint64_t total = 0;
  for (const std::uint64_t w : words_) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

bool Raster2D::subset_of(const Raster2D& other) const {
  if (domain_log2_ != other.domain_log2_) {
    throw DomainError("raster domains differ");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] & ~other.words_[i]) return false;
  }
  return true;
}

bool Raster2D::operator==(const Raster2D& other) const {
  return domain_log2_ == other.domain_log2_ && words_ == other.words_;
}

Raster2D rasterize_families(const Crystal2D& crystal, const std::vector<RectFamily>& families) {
  Raster2D out(crystal.domain_log2());
  for (const RectFamily& fam : families) {
    if (!fam.x_translates.materialized() || !fam.y_intervals.materialized()) {
      throw ValidationError("family at level " + std::to_string(fam.level_j) +
                            " is too large to rasterize");
    }
    const std::uint64_t w = std::uint64_t{1} << fam.width_log2;
    const std::uint64_t h = std::uint64_t{1} << fam.height_log2;
    for (const BigInt& xo : fam.x_translates.offsets()) {
      for (const BigInt& yo : fam.y_intervals.offsets()) {
        out.fill_rect(xo.convert_to<std::uint64_t>(), yo.convert_to<std::uint64_t>(), w, h);
      }
    }
  }
  return out;
}

Raster2D brute_force_superlevel(const Crystal2D& crystal, const DyadicScalar& level) {
  const std::int64_t d = crystal.domain_log2();
  if (d > Raster2D::kMaxDomainLog2) {
    throw ValidationError("exhaustive superlevel search needs domain <= 2^" +
                          std::to_string(Raster2D::kMaxDomainLog2) + " cells per axis");
  }
  const std::int64_t D = std::int64_t{1} << d;
  const CellBitset axis = crystal.axis.rasterize();

  // 1D prefix counts: the crystal average over a rectangle factors through
  // these, so no 2D prefix table is needed.
  std::vector<std::int32_t> pref(static_cast<std::size_t>(D) + 1, 0);
  for (std::int64_t i = 0; i < D; ++i) {
    pref[i + 1] = pref[i] + (axis.test(static_cast<std::uint64_t>(i)) ? 1 : 0);
  }

  // Difference-array corner marks; one shared grid across all shapes, one
  // prefix pass at the end.
  const std::size_t stride = static_cast<std::size_t>(D) + 1;
  std::vector<std::int32_t> diff(stride * stride, 0);
  auto mark = [&](std::int64_t x0, std::int64_t y0, std::int64_t w, std::int64_t h) {
    diff[static_cast<std::size_t>(x0) * stride + y0] += 1;
    diff[static_cast<std::size_t>(x0 + w) * stride + y0] -= 1;
    diff[static_cast<std::size_t>(x0) * stride + (y0 + h)] -= 1;
    diff[static_cast<std::size_t>(x0 + w) * stride + (y0 + h)] += 1;
  };

  for (std::int64_t i = 1; i <= crystal.seq.k(); ++i) {
    const std::int64_t m = crystal.seq.m(i);
    for (std::int64_t a = std::max<std::int64_t>(0, m - d); a <= std::min(m, d); ++a) {
      const std::int64_t w = std::int64_t{1} << a;
      const std::int64_t h = std::int64_t{1} << (m - a);
      // Average >= level over a 2^m cell rectangle means cell count >= c*.
      const BigInt cstar_big = level.mul_pow2(m).ceil_value();
      if (cstar_big > w * h) continue;
      const std::int64_t cstar =
          cstar_big < 0 ? 0 : cstar_big.convert_to<std::int64_t>();
      std::int32_t max_cy = 0;
      for (std::int64_t y0 = 0; y0 + h <= D; ++y0) {
        max_cy = std::max(max_cy, static_cast<std::int32_t>(pref[y0 + h] - pref[y0]));
      }
      for (std::int64_t x0 = 0; x0 + w <= D; ++x0) {
        const std::int64_t cx = pref[x0 + w] - pref[x0];
        if (cx * max_cy < cstar) continue;
        for (std::int64_t y0 = 0; y0 + h <= D; ++y0) {
          const std::int64_t cy = pref[y0 + h] - pref[y0];
          if (cx * cy >= cstar) mark(x0, y0, w, h);
        }
      }
    }
  }

  for (std::size_t x = 0; x < stride; ++x) {
    for (std::size_t y = 1; y < stride; ++y) diff[x * stride + y] += diff[x * stride + y - 1];
  }
  for (std::size_t x = 1; x < stride; ++x) {
    for (std::size_t y = 0; y < stride; ++y) diff[x * stride + y] += diff[(x - 1) * stride + y];
  }

  Raster2D out(d);
  for (std::int64_t x = 0; x < D; ++x) {
    for (std::int64_t y = 0; y < D; ++y) {
      if (diff[static_cast<std::size_t>(x) * stride + y] > 0) {
        out.fill_rect(static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y), 1, 1);
      }
    }
  }
  return out;
}

CrystalCertificate certify_crystal(const Crystal2D& crystal, EngineMode mode,
                                   const ParallelOptions& par, const VerifyOptions& verify) {
  const ExponentSequence& seq = crystal.seq;
  const std::int64_t k = seq.k();
  const std::int64_t mk = seq.m_k();

  EngineCtx ctx;
  ctx.mode = mode;
  if (mode != EngineMode::symbolic) {
    if (mk > RareSet1D::kBitsetCapLog2) {
      throw ValidationError("engine '" + std::string(engine_name(mode)) +
                            "' needs a dense raster but the axis has 2^" +
                            std::to_string(mk) + " cells (cap 2^" +
                            std::to_string(RareSet1D::kBitsetCapLog2) +
                            "); use the symbolic engine");
    }
    ctx.dense = true;
    ctx.axis_raster = crystal.axis.rasterize();
  }

  const std::int64_t levels = (k + 3) / 4;  // ceil(k/4)
  std::vector<RectFamily> fams;
  fams.reserve(static_cast<std::size_t>(levels));
  for (std::int64_t j = 1; j <= levels; ++j) fams.push_back(build_rect_family(crystal, j));

  // Test hook: corrupt one recorded quantity so the identity checks below
  // must catch it through the standard path.
  if (verify.inject_engine_fault) fams[0].union_measure += DyadicScalar(1);

  const DyadicScalar full_union = DyadicScalar::pow2(2 * mk - k);
  std::vector<MemberCheck> checks;
  for (const RectFamily& fam : fams) {
    if (fam.union_measure != full_union) {
      throw EngineDisagreement("family union at level " + std::to_string(fam.level_j) +
                               ": " + scalar_pair(fam.union_measure, full_union) +
                               " expected");
    }
    if (!fam.pairwise_disjoint()) {
      throw EngineDisagreement("family at level " + std::to_string(fam.level_j) +
                               " is not pairwise disjoint");
    }
    append_member_checks(checks, crystal.axis, fam.x_translates,
                         DyadicScalar::pow2(-fam.level_j), fam.level_j, 'x', verify);
    append_member_checks(checks, crystal.axis, fam.y_intervals,
                         DyadicScalar::pow2(fam.level_j - k), fam.level_j, 'y', verify);
    // Spot-check the product identity on whole rectangles as well.
    const DyadicScalar want_avg = DyadicScalar::pow2(-k);
    for (BigInt idx = 0; idx < std::min(fam.count, BigInt(4)); ++idx) {
      if (rect_average(crystal, fam.member(idx)) != want_avg) {
        throw EngineDisagreement("rectangle average at level " +
                                 std::to_string(fam.level_j) + " misses 2^-" +
                                 std::to_string(k));
      }
    }
  }

  parallel_for_index(static_cast<std::int64_t>(checks.size()), par, [&](std::int64_t i) {
    const MemberCheck& c = checks[static_cast<std::size_t>(i)];
    const DyadicScalar avg = ctx.axis_average(*c.axis, c.offset, c.length_log2);
    if (avg != c.expected) {
      throw EngineDisagreement(std::string("level ") + std::to_string(c.level_j) + " " +
                               c.axis_name + " translate at offset " + c.offset.str() +
                               ": average " + scalar_pair(avg, c.expected) + " expected");
    }
  });

  const StaircaseResult stairs = staircase_impl(crystal, fams, ctx);

  // Closed forms: the first family fills 2^(2m_k - k), every further level
  // adds exactly half of that; the half-weight sum is levels/2 of it.
  const DyadicScalar want_union =
      full_union + DyadicScalar::scaled(BigInt(levels - 1), 2 * mk - k - 1);
  const DyadicScalar want_half = DyadicScalar::scaled(BigInt(levels), 2 * mk - k - 1);
  if (stairs.union_measure != want_union) {
    throw EngineDisagreement("staircase union: " +
                             scalar_pair(stairs.union_measure, want_union) + " expected");
  }
  if (stairs.half_fill_bound != want_half) {
    throw EngineDisagreement("half-weight sum: " +
                             scalar_pair(stairs.half_fill_bound, want_half) + " expected");
  }
  if (stairs.half_fill_bound > stairs.union_measure) {
    throw EngineDisagreement("half-weight sum exceeds the exact union");
  }

  if (ctx.dense && mk <= Raster2D::kMaxDomainLog2) {
    const Raster2D painted = rasterize_families(crystal, fams);
    const DyadicScalar painted_measure{BigInt(painted.count())};
    if (painted_measure != stairs.union_measure) {
      throw EngineDisagreement("rasterized union: " +
                               scalar_pair(painted_measure, stairs.union_measure) +
                               " staircase");
    }
  }

  std::vector<FamilySummary> summaries;
  summaries.reserve(fams.size());
  for (const RectFamily& fam : fams) {
    summaries.push_back(
        FamilySummary{fam.level_j, fam.count, fam.area_log2, fam.union_measure});
  }
  const DyadicScalar required = DyadicScalar::scaled(BigInt(k), 2 * mk - k - 3);
  const bool pass =
      stairs.union_measure >= required && stairs.half_fill_bound >= required;
  return CrystalCertificate{seq,
                            k,
                            levels,
                            std::move(summaries),
                            stairs.overlap,
                            stairs.union_measure,
                            stairs.half_fill_bound,
                            required,
                            pass,
                            ctx.dense};
}

}  // namespace rarebasis
