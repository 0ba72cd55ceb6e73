// Synthetic ambient LPG/CO concentrations and the MQ-5 / MQ-9 sensor
// electronics that turn them into ADC counts and back.
//
// The sensor transfer function is the usual datasheet power law
//   Rs(ppm) = R0 * a * ppm^b        (b < 0, so Rs falls as gas rises)
// read through a voltage divider
//   Vout = Vcc * RL / (Rs + RL)
// and quantized by an n-bit ADC referenced to Vcc. Coefficients are
// placeholders in the datasheet's log-log shape, not calibrated values;
// every field is configurable.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gasnet/errors.hpp"
#include "gasnet/prng.hpp"

namespace gasnet {

enum class GasSpecies { LPG = 0, CO = 1 };

inline constexpr GasSpecies kAllSpecies[] = {GasSpecies::LPG, GasSpecies::CO};

inline const char* species_name(GasSpecies s) {
  return s == GasSpecies::LPG ? "LPG" : "CO";
}

// Sensor measurement range shared by both gases.
inline constexpr double kPpmFloor = 0.0;
inline constexpr double kPpmCeil = 1000.0;

// ---------------------------------------------------------------------------
// Scenario: ambient concentration as a pure function of time.

struct DiurnalPeak {
  double hour = 0.0;           // hour-of-day, 0-23, wraps at midnight
  double amplitude_ppm = 0.0;  // added at the peak centre
  double width_h = 1.0;        // gaussian sigma, hours
};

enum class EventKind { Leak, Washout };
enum class EventSpecies { LPG, CO, Both };

struct ScenarioEvent {
  EventKind kind = EventKind::Leak;
  EventSpecies species = EventSpecies::Both;
  double start_s = 0.0;
  double duration_s = 0.0;  // > 0
  // Leak: ppm added at full strength. Washout: attenuation factor in [0,1]
  // applied to everything above the ambient base.
  double magnitude = 0.0;
  double ramp_s = 0.0;  // linear onset/offset, >= 0
};

struct Scenario {
  std::string name;
  double base_lpg_ppm = 0.0;
  double base_co_ppm = 0.0;
  std::vector<DiurnalPeak> diurnal_peaks;
  std::vector<ScenarioEvent> events;
  std::uint64_t seed = 0;
  double noise_sd = 0.0;  // sigma of additive noise, ppm
};

inline double base_ppm(const Scenario& s, GasSpecies g) {
  return g == GasSpecies::LPG ? s.base_lpg_ppm : s.base_co_ppm;
}

inline bool event_applies(const ScenarioEvent& e, GasSpecies g) {
  return e.species == EventSpecies::Both ||
         (e.species == EventSpecies::LPG && g == GasSpecies::LPG) ||
         (e.species == EventSpecies::CO && g == GasSpecies::CO);
}

// Trapezoid activity weight: 0 outside [start, start+duration], linear over
// ramp_s at each end, 1 in the plateau. ramp_s = 0 gives a rectangle whose
// edges are inclusive.
inline double event_weight(const ScenarioEvent& e, double t_s) {
  const double end = e.start_s + e.duration_s;
  if (t_s < e.start_s || t_s > end) return 0.0;
  if (e.ramp_s <= 0.0) return 1.0;
  const double up = (t_s - e.start_s) / e.ramp_s;
  const double down = (end - t_s) / e.ramp_s;
  return std::clamp(std::min(up, down), 0.0, 1.0);
}

inline std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> v;
  if (s.base_lpg_ppm < 0 || s.base_co_ppm < 0) v.push_back("base_ppm must be >= 0");
  if (s.noise_sd < 0) v.push_back("noise_sd must be >= 0");
  for (const auto& p : s.diurnal_peaks) {
    if (p.hour < 0 || p.hour >= 24) v.push_back("diurnal peak hour must be in [0, 24)");
    if (p.width_h <= 0) v.push_back("diurnal peak width_h must be > 0");
    if (p.amplitude_ppm < 0) v.push_back("diurnal peak amplitude must be >= 0");
  }
  for (const auto& e : s.events) {
    if (e.duration_s <= 0) v.push_back("event duration_s must be > 0");
    if (e.ramp_s < 0) v.push_back("event ramp_s must be >= 0");
    if (e.kind == EventKind::Leak && e.magnitude < 0)
      v.push_back("leak magnitude must be >= 0");
    if (e.kind == EventKind::Washout && (e.magnitude < 0 || e.magnitude > 1))
      v.push_back("washout factor must be in [0, 1]");
  }
  return v;
}

// Ambient concentration at t_s seconds from scenario start (start = midnight).
// Deterministic: the noise term is a pure function of (seed, species, t_s).
inline double scenario_ppm(const Scenario& s, GasSpecies g, double t_s) {
  const double hour = std::fmod(t_s / 3600.0, 24.0);

  double excess = 0.0;
  for (const auto& p : s.diurnal_peaks) {
    double dh = std::fabs(hour - p.hour);
    dh = std::min(dh, 24.0 - dh);  // wrap at midnight
    excess += p.amplitude_ppm * std::exp(-0.5 * (dh / p.width_h) * (dh / p.width_h));
  }

  double washout = 1.0;
  for (const auto& e : s.events) {
    if (!event_applies(e, g)) continue;
    const double w = event_weight(e, t_s);
    if (w <= 0.0) continue;
    if (e.kind == EventKind::Leak) {
      excess += e.magnitude * w;
    } else {
      // Interpolate 1 -> factor as the event ramps in; rain disperses the
      // pollutant excess, never the ambient floor.
      washout *= 1.0 + (e.magnitude - 1.0) * w;
    }
  }

  double ppm = base_ppm(s, g) + excess * washout;
  if (s.noise_sd > 0.0) {
    SplitMix64 rng(hash_combine(hash_combine(s.seed, static_cast<std::uint64_t>(g)),
                                std::bit_cast<std::uint64_t>(t_s)));
    ppm += s.noise_sd * rng.next_gaussian();
  }
  return std::clamp(ppm, kPpmFloor, kPpmCeil);
}

// ---------------------------------------------------------------------------
// SensorCurve: ppm <-> ADC counts.

struct SensorCurve {
  GasSpecies species = GasSpecies::LPG;
  double a_coeff = 1.0;   // > 0
  double b_exp = -0.42;   // < 0
  double r0_ohm = 10000.0;
  double rl_ohm = 10000.0;
  double vcc_v = 5.0;
  int adc_bits = 10;      // [8, 16]
  double ppm_min = 1.0;
  double ppm_max = 1000.0;
};

inline SensorCurve default_curve(GasSpecies g) {
  SensorCurve c;
  c.species = g;
  c.b_exp = (g == GasSpecies::LPG) ? -0.42 : -0.48;
  return c;
}

inline std::vector<std::string> validate(const SensorCurve& c) {
  std::vector<std::string> v;
  if (c.a_coeff <= 0) v.push_back("a_coeff must be > 0");
  if (c.b_exp >= 0) v.push_back("b_exp must be < 0");
  if (c.r0_ohm <= 0) v.push_back("r0_ohm must be > 0");
  if (c.rl_ohm <= 0) v.push_back("rl_ohm must be > 0");
  if (c.vcc_v <= 0) v.push_back("vcc_v must be > 0");
  if (c.adc_bits < 8 || c.adc_bits > 16) v.push_back("adc_bits must be in [8, 16]");
  if (c.ppm_min <= 0 || c.ppm_min >= c.ppm_max)
    v.push_back("require 0 < ppm_min < ppm_max");
  return v;
}

inline int adc_max_count(const SensorCurve& c) { return (1 << c.adc_bits) - 1; }

inline double sensor_resistance_ohm(const SensorCurve& c, double ppm) {
  return c.r0_ohm * c.a_coeff * std::pow(ppm, c.b_exp);
}

inline int ppm_to_adc(const SensorCurve& c, double ppm) {
  if (!(ppm >= c.ppm_min && ppm <= c.ppm_max))
    throw OutOfRange("ppm " + std::to_string(ppm) + " outside [" +
                     std::to_string(c.ppm_min) + ", " + std::to_string(c.ppm_max) + "]");
  const double rs = sensor_resistance_ohm(c, ppm);
  const double ratio = c.rl_ohm / (rs + c.rl_ohm);  // Vout / Vcc
  const int counts = static_cast<int>(std::lround(ratio * adc_max_count(c)));
  return std::clamp(counts, 0, adc_max_count(c));
}

// Analytic inverse: solve the divider for Rs, then ppm = (Rs / (R0 a))^(1/b).
// Counts implying a resistance outside the representable band clamp to the
// nearest range endpoint, so the conversion is total on [0, max_count].
inline double adc_to_ppm(const SensorCurve& c, int counts) {
  const int maxc = adc_max_count(c);
  if (counts < 0 || counts > maxc)
    throw OutOfRange("counts " + std::to_string(counts) + " outside [0, " +
                     std::to_string(maxc) + "]");
  if (counts == 0) return c.ppm_min;    // Rs -> infinity
  if (counts == maxc) return c.ppm_max; // Rs -> 0
  const double ratio = static_cast<double>(counts) / maxc;
  const double rs = c.rl_ohm * (1.0 - ratio) / ratio;
  const double ppm = std::pow(rs / (c.r0_ohm * c.a_coeff), 1.0 / c.b_exp);
  return std::clamp(ppm, c.ppm_min, c.ppm_max);
}

// Saturating variant for driving the ADC from scenario output, which may sit
// below ppm_min; a real sensor just pegs at the end of its range.
inline int ppm_to_adc_saturating(const SensorCurve& c, double ppm) {
  return ppm_to_adc(c, std::clamp(ppm, c.ppm_min, c.ppm_max));
}

// ---------------------------------------------------------------------------
// JSON (scenario files and station/service configs).

inline void to_json(nlohmann::json& j, const DiurnalPeak& p) {
  j = {{"hour", p.hour}, {"amplitude_ppm", p.amplitude_ppm}, {"width_h", p.width_h}};
}

inline void from_json(const nlohmann::json& j, DiurnalPeak& p) {
  j.at("hour").get_to(p.hour);
  j.at("amplitude_ppm").get_to(p.amplitude_ppm);
  j.at("width_h").get_to(p.width_h);
}

inline void to_json(nlohmann::json& j, const ScenarioEvent& e) {
  j = {{"kind", e.kind == EventKind::Leak ? "leak" : "washout"},
       {"species", e.species == EventSpecies::Both
                       ? "both"
                       : (e.species == EventSpecies::LPG ? "lpg" : "co")},
       {"start_s", e.start_s},
       {"duration_s", e.duration_s},
       {"magnitude", e.magnitude},
       {"ramp_s", e.ramp_s}};
}

inline void from_json(const nlohmann::json& j, ScenarioEvent& e) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "leak")
    e.kind = EventKind::Leak;
  else if (kind == "washout")
    e.kind = EventKind::Washout;
  else
    throw ParseError("unknown event kind: " + kind);
  const std::string sp = j.value("species", "both");
  if (sp == "lpg")
    e.species = EventSpecies::LPG;
  else if (sp == "co")
    e.species = EventSpecies::CO;
  else if (sp == "both")
    e.species = EventSpecies::Both;
  else
    throw ParseError("unknown event species: " + sp);
  j.at("start_s").get_to(e.start_s);
  j.at("duration_s").get_to(e.duration_s);
  j.at("magnitude").get_to(e.magnitude);
  e.ramp_s = j.value("ramp_s", 0.0);
}

inline void to_json(nlohmann::json& j, const Scenario& s) {
  j = {{"name", s.name},
       {"base_ppm", {{"lpg", s.base_lpg_ppm}, {"co", s.base_co_ppm}}},
       {"diurnal_peaks", s.diurnal_peaks},
       {"events", s.events},
       {"seed", s.seed},
       {"noise_sd", s.noise_sd}};
}

inline void from_json(const nlohmann::json& j, Scenario& s) {
  s.name = j.value("name", "");
  const auto& base = j.at("base_ppm");
  base.at("lpg").get_to(s.base_lpg_ppm);
  base.at("co").get_to(s.base_co_ppm);
  s.diurnal_peaks = j.value("diurnal_peaks", std::vector<DiurnalPeak>{});
  s.events = j.value("events", std::vector<ScenarioEvent>{});
  s.seed = j.value("seed", std::uint64_t{0});
  s.noise_sd = j.value("noise_sd", 0.0);
}

inline void to_json(nlohmann::json& j, const SensorCurve& c) {
  j = {{"a_coeff", c.a_coeff},   {"b_exp", c.b_exp},     {"r0_ohm", c.r0_ohm},
       {"rl_ohm", c.rl_ohm},     {"vcc_v", c.vcc_v},     {"adc_bits", c.adc_bits},
       {"ppm_min", c.ppm_min},   {"ppm_max", c.ppm_max}};
}

inline void from_json(const nlohmann::json& j, SensorCurve& c) {
  c.a_coeff = j.value("a_coeff", c.a_coeff);
  c.b_exp = j.value("b_exp", c.b_exp);
  c.r0_ohm = j.value("r0_ohm", c.r0_ohm);
  c.rl_ohm = j.value("rl_ohm", c.rl_ohm);
  c.vcc_v = j.value("vcc_v", c.vcc_v);
  c.adc_bits = j.value("adc_bits", c.adc_bits);
  c.ppm_min = j.value("ppm_min", c.ppm_min);
  c.ppm_max = j.value("ppm_max", c.ppm_max);
}

}  // namespace gasnet
