#include "rarebasis/json_io.hpp"

#include <ios>

namespace rarebasis {

std::string hp_str(const HPReal& value) {
  return value.str(40, std::ios_base::scientific);
}

Json to_json(const DyadicScalar& x) {
  return Json{{"m", x.mantissa().str()}, {"e", -x.exponent()}};
}

Json to_json(const ExponentSequence& seq) {
  return Json(seq.exponents());
}

Json to_json(const TrackedReal& t) {
  return Json{{"value", hp_str(t.value)}, {"abs_error", hp_str(t.abs_error)}};
}

Json to_json(const FamilySummary& f) {
  return Json{{"level", f.level_j},
              {"count", f.count.str()},
              {"area_log2", f.area_log2},
              {"union_measure", to_json(f.union_measure)}};
}

Json to_json(const CrystalCertificate& cert) {
  Json families = Json::array();
  for (const FamilySummary& f : cert.families) families.push_back(to_json(f));
  Json overlap = Json::array();
  for (const auto& row : cert.overlap) {
    Json r = Json::array();
    for (const DyadicScalar& x : row) r.push_back(to_json(x));
    overlap.push_back(std::move(r));
  }
  return Json{{"type", "crystal"},
              {"sequence", to_json(cert.seq)},
              {"k", cert.k},
              {"levels", cert.levels},
              {"families", std::move(families)},
              {"overlap", std::move(overlap)},
              {"union_measure", to_json(cert.union_measure)},
              {"half_fill_bound", to_json(cert.half_fill_bound)},
              {"required_bound", to_json(cert.required_bound)},
              {"pass", cert.pass},
              {"cross_checked", cert.cross_checked}};
}

Json to_json(const SlabRecord& slab) {
  return Json{{"r", slab.r},
              {"copies", slab.copies.str()},
              {"per_copy_measure", to_json(slab.per_copy_measure)},
              {"slab_bottom_log2", slab.slab_bottom_log2},
              {"contribution", to_json(slab.contribution)},
              {"floor_bound", to_json(slab.floor_bound)},
              {"cross_checked", slab.cross_checked}};
}

Json to_json(const BasisCertificate& cert) {
  Json slabs = Json::array();
  for (const SlabRecord& s : cert.slabs) slabs.push_back(to_json(s));
  return Json{{"type", "basis"},
              {"sequence", to_json(cert.seq)},
              {"k", cert.k},
              {"slabs", std::move(slabs)},
              {"total", to_json(cert.total)},
              {"required_bound", to_json(cert.required_bound)},
              {"pass", cert.pass},
              {"cross_checked", cert.cross_checked}};
}

Json to_json(const RatioRow& row) {
  Json out{{"k", row.k},
           {"alpha_log2", row.alpha_log2},
           {"p", row.p},
           {"quarter_sum", row.quarter_sum.str()},
           {"lower_bound", to_json(row.lower_bound)},
           {"denominator", to_json(row.denominator)},
           {"ratio", to_json(row.ratio)}};
  if (row.exact_ratio) out["exact_ratio"] = to_json(*row.exact_ratio);
  return out;
}

Json to_json(const SharpnessTable& table) {
  Json rows = Json::array();
  for (const RatioRow& row : table.rows) rows.push_back(to_json(row));
  return Json{{"k_min", table.k_min}, {"k_max", table.k_max}, {"rows", std::move(rows)}};
}

Json to_json(const TrendLine& line) {
  return Json{{"p", line.p},
              {"classification", line.classification},
              {"growth_degree", to_json(line.growth_degree)},
              {"checks_pass", line.checks_pass},
              {"note", line.note}};
}

Json to_json(const TrendReport& report) {
  Json lines = Json::array();
  for (const TrendLine& line : report.lines) lines.push_back(to_json(line));
  return Json{{"lines", std::move(lines)}, {"caveat", report.caveat}};
}

Json to_json(const FiniteSReport& report) {
  Json rows = Json::array();
  for (const RatioRow& row : report.rows) rows.push_back(to_json(row));
  return Json{{"scales", Json(report.scales)},
              {"capacity", report.capacity},
              {"rows", std::move(rows)},
              {"statement", report.statement}};
}

}  // namespace rarebasis
