// History rendering for operators: aligned terminal tables, RFC-4180 CSV
// (CRLF, quoted only where required), or a JSON array.
//
// A report source is either a local data directory (ndjson segments read
// straight off disk) or a live service base URL (public read API). Both paths
// materialize the same record structs and feed the same renderers, so local
// and remote output for the same data is byte-identical.
#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gasnet/errors.hpp"
#include "gasnet/http_api.hpp"
#include "gasnet/service.hpp"
#include "gasnet/storage.hpp"

namespace gasnet::report {

enum class Format { Table, Csv, Json };

inline Format parse_format(const std::string& name) {
  if (name == "table") return Format::Table;
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw InvalidConfig("unknown format: " + name + " (expected table, csv or json)");
}

inline bool looks_like_url(const std::string& source) {
  return source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0;
}

// ---------------------------------------------------------------------------
// Sources.

inline std::vector<storage::StoredReading> fetch_readings(const std::string& source,
                                                          const std::string& station,
                                                          std::int64_t from_s,
                                                          std::int64_t to_s) {
  if (looks_like_url(source)) {
    TelemetryClient cli(source);
    try {
      return cli.fetch_readings(station, from_s, to_s);
    } catch (const HttpStatusError& e) {
      if (e.status == 404) throw storage::UnknownStation(station);
      throw InvalidConfig(e.what());
    }
  }
  std::vector<storage::StoredReading> out;
  for (auto& r : storage::read_station_readings(source, station))
    if (r.payload.ts >= from_s && r.payload.ts <= to_s) out.push_back(std::move(r));
  // Same cap the service applies when no explicit limit is given, so local
  // and remote reports agree even on oversized ranges.
  if (out.size() > kMaxQueryLimit) out.resize(kMaxQueryLimit);
  return out;
}

inline std::vector<HourlyBucket> fetch_hourly(const std::string& source,
                                              const std::string& station,
                                              std::int64_t from_s, std::int64_t to_s) {
  if (looks_like_url(source)) {
    TelemetryClient cli(source);
    try {
      return cli.fetch_hourly(station, from_s, to_s);
    } catch (const HttpStatusError& e) {
      if (e.status == 404) throw storage::UnknownStation(station);
      throw InvalidConfig(e.what());
    }
  }
  return hourly_from_readings(fetch_readings(source, station, from_s, to_s));
}

// ---------------------------------------------------------------------------
// Cell formatting.

inline std::string format_mean(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::vector<std::string> reading_cells(const storage::StoredReading& r) {
  return {std::to_string(r.payload.ts),
          format_1dp(r.payload.lpg_ppm),
          r.payload.lpg_level,
          format_1dp(r.payload.co_ppm),
          r.payload.co_level,
          r.payload.alarm ? "true" : "false"};
}

inline std::vector<std::string> hourly_cells(const HourlyBucket& b) {
  return {std::to_string(b.hour_start_s), format_mean(b.lpg_mean), format_mean(b.co_mean),
          std::to_string(b.count)};
}

inline const std::vector<std::string>& reading_headers() {
  static const std::vector<std::string> h{"ts",     "lpg_ppm",  "lpg_level",
                                          "co_ppm", "co_level", "alarm"};
  return h;
}

inline const std::vector<std::string>& hourly_headers() {
  static const std::vector<std::string> h{"hour_start_s", "lpg_ppm_mean", "co_ppm_mean",
                                          "count"};
  return h;
}

// Numeric columns are right-aligned in table mode.
inline const std::vector<bool>& reading_numeric() {
  static const std::vector<bool> n{true, true, false, true, false, false};
  return n;
}

inline const std::vector<bool>& hourly_numeric() {
  static const std::vector<bool> n{true, true, true, true};
  return n;
}

// ---------------------------------------------------------------------------
// Renderers.

inline std::string render_table(const std::vector<std::string>& headers,
                                const std::vector<bool>& numeric,
                                const std::vector<std::vector<std::string>>& rows,
                                const std::string& footer) {
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) width[c] = headers[c].size();
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t pad = width[c] - cells[c].size();
      if (c) out += "  ";
      if (numeric[c]) out.append(pad, ' ');
      out += cells[c];
      if (!numeric[c] && c + 1 < cells.size()) out.append(pad, ' ');
    }
    out += '\n';
  };
  emit(headers);
  for (const auto& row : rows) emit(row);
  out += footer;
  out += '\n';
  return out;
}

inline std::string csv_field(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char ch : cell) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

inline std::string render_csv(const std::vector<std::string>& headers,
                              const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += ',';
      out += csv_field(cells[c]);
    }
    out += "\r\n";
  };
  emit(headers);
  for (const auto& row : rows) emit(row);
  return out;
}

inline std::string render_readings(const std::vector<storage::StoredReading>& rows,
                                   Format format) {
  if (format == Format::Json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) arr.push_back(nlohmann::ordered_json::parse(to_line(r)));
    return arr.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> cells;
  cells.reserve(rows.size());
  for (const auto& r : rows) cells.push_back(reading_cells(r));
  if (format == Format::Csv) return render_csv(reading_headers(), cells);
  return render_table(reading_headers(), reading_numeric(), cells,
                      "rows: " + std::to_string(rows.size()));
}

inline std::string render_hourly(const std::vector<HourlyBucket>& buckets, Format format) {
  if (format == Format::Json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& b : buckets)
      arr.push_back(nlohmann::ordered_json{{"hour_start_s", b.hour_start_s},
                                           {"lpg_ppm_mean", b.lpg_mean},
                                           {"co_ppm_mean", b.co_mean},
                                           {"count", b.count}});
    return arr.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> cells;
  cells.reserve(buckets.size());
  std::uint64_t readings = 0;
  for (const auto& b : buckets) {
    cells.push_back(hourly_cells(b));
    readings += b.count;
  }
  if (format == Format::Csv) return render_csv(hourly_headers(), cells);
  return render_table(hourly_headers(), hourly_numeric(), cells,
                      "hours: " + std::to_string(buckets.size()) +
                          "  readings: " + std::to_string(readings));
}

}  // namespace gasnet::report
