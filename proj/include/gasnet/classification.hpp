// Hazard banding. Band edges follow the "<= normal_max is Normal" rule so the
// classification is total over real-valued ppm while keeping every integer
// assignment from the published tables: LPG 0-400 Normal, 401-800 Hazardous,
// >800 Explosive; CO 0-50 Normal, 51-800 Dangerous, >800 Deadly.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gasnet/gas_model.hpp"

namespace gasnet {

enum class HazardLevel { Normal = 0, Elevated = 1, Critical = 2 };

// Display names are per species: LPG escalates Normal/Hazardous/Explosive,
// CO escalates Normal/Dangerous/Deadly.
inline const char* level_name(GasSpecies g, HazardLevel l) {
  switch (l) {
    case HazardLevel::Normal: return "NORMAL";
    case HazardLevel::Elevated: return g == GasSpecies::LPG ? "HAZARDOUS" : "DANGEROUS";
    case HazardLevel::Critical: return g == GasSpecies::LPG ? "EXPLOSIVE" : "DEADLY";
  }
  return "NORMAL";
}

inline bool is_level_name(GasSpecies g, const std::string& s) {
  return s == level_name(g, HazardLevel::Normal) ||
         s == level_name(g, HazardLevel::Elevated) ||
         s == level_name(g, HazardLevel::Critical);
}

struct SpeciesThresholds {
  double normal_max = 0.0;
  double elevated_max = 0.0;
};

struct ThresholdTable {
  SpeciesThresholds lpg{400.0, 800.0};
  SpeciesThresholds co{50.0, 800.0};

  const SpeciesThresholds& for_species(GasSpecies g) const {
    return g == GasSpecies::LPG ? lpg : co;
  }
};

inline std::vector<std::string> validate(const ThresholdTable& t) {
  std::vector<std::string> v;
  if (!(t.lpg.normal_max > 0 && t.lpg.normal_max < t.lpg.elevated_max))
    v.push_back("thresholds.lpg: require 0 < normal_max < elevated_max");
  if (!(t.co.normal_max > 0 && t.co.normal_max < t.co.elevated_max))
    v.push_back("thresholds.co: require 0 < normal_max < elevated_max");
  return v;
}

inline HazardLevel classify(const ThresholdTable& t, GasSpecies g, double ppm) {
  const SpeciesThresholds& th = t.for_species(g);
  if (ppm <= th.normal_max) return HazardLevel::Normal;
  if (ppm <= th.elevated_max) return HazardLevel::Elevated;
  return HazardLevel::Critical;
}

inline bool above_normal(const ThresholdTable& t, GasSpecies g, double ppm) {
  return classify(t, g, ppm) > HazardLevel::Normal;
}

// The alarm/buzzer trigger: any species out of its Normal band.
inline bool above_threshold(const ThresholdTable& t, double lpg_ppm, double co_ppm) {
  return above_normal(t, GasSpecies::LPG, lpg_ppm) ||
         above_normal(t, GasSpecies::CO, co_ppm);
}

inline void to_json(nlohmann::json& j, const ThresholdTable& t) {
  j = {{"lpg", {{"normal_max", t.lpg.normal_max}, {"elevated_max", t.lpg.elevated_max}}},
       {"co", {{"normal_max", t.co.normal_max}, {"elevated_max", t.co.elevated_max}}}};
}

inline void from_json(const nlohmann::json& j, ThresholdTable& t) {
  if (j.contains("lpg")) {
    t.lpg.normal_max = j["lpg"].value("normal_max", t.lpg.normal_max);
    t.lpg.elevated_max = j["lpg"].value("elevated_max", t.lpg.elevated_max);
  }
  if (j.contains("co")) {
    t.co.normal_max = j["co"].value("normal_max", t.co.normal_max);
    t.co.elevated_max = j["co"].value("elevated_max", t.co.elevated_max);
  }
}

}  // namespace gasnet
