#pragma once

#include "json.hpp"

#include "rarebasis/basis3d.hpp"
#include "rarebasis/crystal2d.hpp"
#include "rarebasis/sharpness.hpp"

namespace rarebasis {

// nlohmann::json over std::map: object keys serialize sorted, so a given
// value tree has exactly one rendering. All big integers are decimal
// strings; dyadic scalars are {"m","e"} with value m * 2^e; tracked reals
// are fixed-width scientific strings. Nothing here depends on locale,
// iteration order, or thread count.
using Json = nlohmann::json;

std::string hp_str(const HPReal& value);

Json to_json(const DyadicScalar& x);
Json to_json(const ExponentSequence& seq);
Json to_json(const TrackedReal& t);
Json to_json(const FamilySummary& f);
Json to_json(const CrystalCertificate& cert);
Json to_json(const SlabRecord& slab);
Json to_json(const BasisCertificate& cert);
Json to_json(const RatioRow& row);
Json to_json(const SharpnessTable& table);
Json to_json(const TrendLine& line);
Json to_json(const TrendReport& report);
Json to_json(const FiniteSReport& report);

}  // namespace rarebasis
