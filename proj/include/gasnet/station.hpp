// Firmware loop of a sensor station, modeled as a pure state machine:
// boot() builds the initial state, step() consumes one sample (ADC counts in,
// actions out). The station never performs I/O itself; buzzer, display and
// network sends come back as action values for the harness to execute, which
// makes every trace replayable byte for byte.
//
// Reporting schedule: a full report every report_period_s, plus an immediate
// report when a reading first rises above threshold, plus throttled reports
// every alarm_report_period_s while it stays above.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gasnet/classification.hpp"
#include "gasnet/errors.hpp"
#include "gasnet/gas_model.hpp"
#include "gasnet/telemetry.hpp"

namespace gasnet {

struct StationConfig {
  std::string station_id;
  std::int64_t sample_period_s = 2;
  std::int64_t report_period_s = 600;       // the "every 10 minutes" default
  std::int64_t alarm_report_period_s = 60;
  ThresholdTable thresholds;
  SensorCurve lpg_curve = default_curve(GasSpecies::LPG);
  SensorCurve co_curve = default_curve(GasSpecies::CO);
  std::string api_credential;  // bearer token presented to the service
  bool include_temperature = true;
  std::string firmware_version = "1.0.0";

  const SensorCurve& curve(GasSpecies g) const {
    return g == GasSpecies::LPG ? lpg_curve : co_curve;
  }
};

inline std::vector<std::string> validate(const StationConfig& c) {
  std::vector<std::string> v;
  if (!valid_station_id(c.station_id))
    v.push_back("station_id must be 1-64 chars of [A-Za-z0-9._-]");
  if (c.sample_period_s <= 0) v.push_back("sample_period_s must be > 0");
  if (c.report_period_s <= 0) v.push_back("report_period_s must be > 0");
  if (c.alarm_report_period_s <= 0) v.push_back("alarm_report_period_s must be > 0");
  if (c.sample_period_s > 0 && c.alarm_report_period_s > 0 && c.report_period_s > 0 &&
      !(c.sample_period_s <= c.alarm_report_period_s &&
        c.alarm_report_period_s <= c.report_period_s))
    v.push_back("require sample_period_s <= alarm_report_period_s <= report_period_s");
  for (const auto& m : validate(c.thresholds)) v.push_back(m);
  for (const auto& m : validate(c.lpg_curve)) v.push_back("curves.lpg: " + m);
  for (const auto& m : validate(c.co_curve)) v.push_back("curves.co: " + m);
  return v;
}

struct BuzzerOn {};
struct BuzzerOff {};
struct Display {
  std::vector<std::string> lines;
};
struct Send {
  TelemetryPayload payload;
};
using StationAction = std::variant<BuzzerOn, BuzzerOff, Display, Send>;

struct StationState {
  StationConfig config;
  std::optional<std::int64_t> last_report_s;
  HazardLevel last_lpg_level = HazardLevel::Normal;
  HazardLevel last_co_level = HazardLevel::Normal;
  bool buzzer_on = false;
  std::vector<std::string> display_lines;
  std::uint64_t seq = 0;  // number of payloads sent since boot
  bool booted = false;
  std::optional<std::int64_t> last_step_s;

  bool was_above() const {
    return last_lpg_level > HazardLevel::Normal || last_co_level > HazardLevel::Normal;
  }
};

// SSD1306-style 128 px panel at a 6 px font: 21 characters per line, 4 lines.
inline constexpr std::size_t kDisplayCols = 21;
inline constexpr std::size_t kDisplayRows = 4;

inline std::string clip_line(std::string s) {
  if (s.size() > kDisplayCols) s.resize(kDisplayCols);
  return s;
}

inline std::vector<std::string> render_display(const GasReading& r,
                                               HazardLevel lpg_level,
                                               HazardLevel co_level) {
  std::vector<std::string> lines;
  lines.push_back(clip_line("LPG " + format_1dp(quantize_1dp(r.lpg_ppm)) + " " +
                            level_name(GasSpecies::LPG, lpg_level)));
  lines.push_back(clip_line("CO " + format_1dp(quantize_1dp(r.co_ppm)) + " " +
                            level_name(GasSpecies::CO, co_level)));
  if (r.temp_c)
    lines.push_back(clip_line("TEMP " + format_1dp(quantize_1dp(*r.temp_c)) + " C"));
  const bool alarm =
      lpg_level > HazardLevel::Normal || co_level > HazardLevel::Normal;
  lines.push_back(alarm ? "STATUS ALARM" : "STATUS OK");
  return lines;
}

inline StationState boot(const StationConfig& config) {
  auto violations = validate(config);
  if (!violations.empty()) {
    std::string msg = "invalid station config: ";
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i) msg += "; ";
      msg += violations[i];
    }
    throw InvalidConfig(msg);
  }
  StationState st;
  st.config = config;
  st.booted = true;
  st.display_lines = {clip_line("GAS MONITOR"), clip_line(config.station_id),
                      clip_line("fw " + config.firmware_version), "WAIT"};
  return st;
}

// True when this step must emit a payload. Consulted before last_* fields are
// updated, so the rising edge is derived from the previous step's levels.
inline bool should_report(const StationState& st, std::int64_t now_s,
                          bool currently_above) {
  if (!st.booted) throw NotBooted();
  if (!st.last_report_s) return true;  // nothing sent yet: report on first step
  const std::int64_t since = now_s - *st.last_report_s;
  if (since >= st.config.report_period_s) return true;
  if (currently_above && !st.was_above()) return true;  // rising edge
  if (currently_above && since >= st.config.alarm_report_period_s) return true;
  return false;
}

inline TelemetryPayload format_payload(const StationState& st, const GasReading& r,
                                       HazardLevel lpg_level, HazardLevel co_level) {
  TelemetryPayload p;
  p.station_id = r.station_id;
  p.ts = r.t_s;
  p.seq = st.seq;
  p.lpg_ppm = quantize_1dp(r.lpg_ppm);
  p.co_ppm = quantize_1dp(r.co_ppm);
  if (r.temp_c) p.temp_c = quantize_1dp(*r.temp_c);
  p.lpg_level = level_name(GasSpecies::LPG, lpg_level);
  p.co_level = level_name(GasSpecies::CO, co_level);
  p.alarm = lpg_level > HazardLevel::Normal || co_level > HazardLevel::Normal;
  p.fw = st.config.firmware_version;
  return p;
}

// One firmware loop iteration. now_s must advance strictly between steps.
inline std::vector<StationAction> step(StationState& st, std::int64_t now_s,
                                       int adc_lpg, int adc_co,
                                       std::optional<double> temp_c) {
  if (!st.booted) throw NotBooted();
  if (st.last_step_s && now_s <= *st.last_step_s)
    throw std::logic_error("station clock must strictly advance");
  st.last_step_s = now_s;

  GasReading r;
  r.station_id = st.config.station_id;
  r.t_s = now_s;
  r.lpg_ppm = adc_to_ppm(st.config.lpg_curve, adc_lpg);
  r.co_ppm = adc_to_ppm(st.config.co_curve, adc_co);
  if (temp_c) r.temp_c = std::clamp(*temp_c, kTempMinC, kTempMaxC);

  const HazardLevel lpg_level = classify(st.config.thresholds, GasSpecies::LPG, r.lpg_ppm);
  const HazardLevel co_level = classify(st.config.thresholds, GasSpecies::CO, r.co_ppm);
  const bool above = lpg_level > HazardLevel::Normal || co_level > HazardLevel::Normal;

  std::vector<StationAction> actions;
  if (above && !st.buzzer_on) {
    st.buzzer_on = true;
    actions.emplace_back(BuzzerOn{});
  } else if (!above && st.buzzer_on) {
    st.buzzer_on = false;
    actions.emplace_back(BuzzerOff{});
  }

  st.display_lines = render_display(r, lpg_level, co_level);
  actions.emplace_back(Display{st.display_lines});

  if (should_report(st, now_s, above)) {
    actions.emplace_back(Send{format_payload(st, r, lpg_level, co_level)});
    st.last_report_s = now_s;
    st.seq += 1;
  }

  st.last_lpg_level = lpg_level;
  st.last_co_level = co_level;
  return actions;
}

// ---------------------------------------------------------------------------
// Station config JSON (used by scenario/sim files).

inline void to_json(nlohmann::json& j, const StationConfig& c) {
  j = {{"station_id", c.station_id},
       {"sample_period_s", c.sample_period_s},
       {"report_period_s", c.report_period_s},
       {"alarm_report_period_s", c.alarm_report_period_s},
       {"thresholds", c.thresholds},
       {"curves", {{"lpg", c.lpg_curve}, {"co", c.co_curve}}},
       {"include_temperature", c.include_temperature},
       {"firmware_version", c.firmware_version}};
}

inline void from_json(const nlohmann::json& j, StationConfig& c) {
  c.station_id = j.value("station_id", "");
  c.sample_period_s = j.value("sample_period_s", c.sample_period_s);
  c.report_period_s = j.value("report_period_s", c.report_period_s);
  c.alarm_report_period_s = j.value("alarm_report_period_s", c.alarm_report_period_s);
  if (j.contains("thresholds")) from_json(j["thresholds"], c.thresholds);
  if (j.contains("curves")) {
    const auto& cv = j["curves"];
    if (cv.contains("lpg")) from_json(cv["lpg"], c.lpg_curve);
    if (cv.contains("co")) from_json(cv["co"], c.co_curve);
  }
  c.api_credential = j.value("api_credential", "");
  c.include_temperature = j.value("include_temperature", c.include_temperature);
  c.firmware_version = j.value("firmware_version", c.firmware_version);
}

}  // namespace gasnet
