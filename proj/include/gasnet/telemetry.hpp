// The station -> service wire record and its canonical JSON form.
//
// Serialization is canonical on purpose: fixed key order, ppm and temperature
// with exactly one decimal place, no whitespace. Byte equality of two payloads
// is therefore meaningful, which the store and the tests rely on.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "gasnet/classification.hpp"
#include "gasnet/errors.hpp"

namespace gasnet {

// One timestamped measurement at a station, already converted to ppm.
struct GasReading {
  std::string station_id;
  std::int64_t t_s = 0;
  double lpg_ppm = 0.0;
  double co_ppm = 0.0;
  std::optional<double> temp_c;
};

inline constexpr double kTempMinC = -40.0;
inline constexpr double kTempMaxC = 85.0;

// Station ids double as directory names on the service side, so the charset
// is restricted accordingly.
inline bool valid_station_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  if (id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

inline double quantize_1dp(double v) { return std::round(v * 10.0) / 10.0; }

inline std::string format_1dp(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

inline void json_append_escaped(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

struct TelemetryPayload {
  std::string station_id;
  std::int64_t ts = 0;
  std::uint64_t seq = 0;
  double lpg_ppm = 0.0;  // one-decimal quantized
  double co_ppm = 0.0;   // one-decimal quantized
  std::optional<double> temp_c;
  std::string lpg_level = "NORMAL";
  std::string co_level = "NORMAL";
  bool alarm = false;
  std::string fw = "1.0.0";

  bool operator==(const TelemetryPayload&) const = default;
};

// Canonical bytes: exactly these keys, in this order.
inline std::string to_wire(const TelemetryPayload& p) {
  std::string out;
  out.reserve(160);
  out += "{\"station_id\":";
  json_append_escaped(out, p.station_id);
  out += ",\"ts\":" + std::to_string(p.ts);
  out += ",\"seq\":" + std::to_string(p.seq);
  out += ",\"lpg_ppm\":" + format_1dp(p.lpg_ppm);
  out += ",\"co_ppm\":" + format_1dp(p.co_ppm);
  out += ",\"temp_c\":";
  out += p.temp_c ? format_1dp(*p.temp_c) : "null";
  out += ",\"lpg_level\":";
  json_append_escaped(out, p.lpg_level);
  out += ",\"co_level\":";
  json_append_escaped(out, p.co_level);
  out += ",\"alarm\":";
  out += p.alarm ? "true" : "false";
  out += ",\"fw\":";
  json_append_escaped(out, p.fw);
  out += '}';
  return out;
}

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing key: ") + key);
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key) {
  const auto& v = require_key(j, key);
  if (!v.is_string()) throw ParseError(std::string(key) + " must be a string");
  return v.get<std::string>();
}

inline double require_number(const nlohmann::json& j, const char* key) {
  const auto& v = require_key(j, key);
  if (!v.is_number()) throw ParseError(std::string(key) + " must be a number");
  return v.get<double>();
}

inline std::int64_t require_int(const nlohmann::json& j, const char* key) {
  const auto& v = require_key(j, key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw ParseError(std::string(key) + " must be an integer");
  return v.get<std::int64_t>();
}

}  // namespace detail

// Parses a payload document. Tolerant of key order and whitespace, strict on
// presence and types of the required keys; unknown keys are ignored.
inline TelemetryPayload payload_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("payload must be a JSON object");
  TelemetryPayload p;
  p.station_id = detail::require_string(j, "station_id");
  p.ts = detail::require_int(j, "ts");
  const std::int64_t seq = detail::require_int(j, "seq");
  if (seq < 0) throw ParseError("seq must be >= 0");
  p.seq = static_cast<std::uint64_t>(seq);
  p.lpg_ppm = detail::require_number(j, "lpg_ppm");
  p.co_ppm = detail::require_number(j, "co_ppm");
  const auto& temp = detail::require_key(j, "temp_c");
  if (temp.is_null())
    p.temp_c.reset();
  else if (temp.is_number())
    p.temp_c = temp.get<double>();
  else
    throw ParseError("temp_c must be a number or null");
  p.lpg_level = detail::require_string(j, "lpg_level");
  p.co_level = detail::require_string(j, "co_level");
  const auto& alarm = detail::require_key(j, "alarm");
  if (!alarm.is_boolean()) throw ParseError("alarm must be a boolean");
  p.alarm = alarm.get<bool>();
  p.fw = detail::require_string(j, "fw");
  return p;
}

inline TelemetryPayload parse_payload(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return payload_from_json(j);
}

}  // namespace gasnet
