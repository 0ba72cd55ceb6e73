// Cloud half of the system, transport-agnostic: authenticates stations,
// validates and stores telemetry, derives alert transitions, answers read
// queries. The HTTP layer in http_api.hpp is a thin adapter over this class,
// and the simulation harness can call it directly in-process.
//
// Writes are serialized through one appender (a single ingest mutex), so
// storage sequence numbers and alert transitions are race-free; reads hit the
// store's shared snapshots and never wait on ingest.
#pragma once

#include <atomic>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gasnet/classification.hpp"
#include "gasnet/storage.hpp"
#include "gasnet/telemetry.hpp"

namespace gasnet {

inline constexpr std::size_t kMaxIngestBodyBytes = 4096;
inline constexpr std::uint64_t kMaxQueryLimit = 10000;
inline constexpr std::size_t kMinTokenLength = 16;

// Rejects early-exit timing: every byte is inspected regardless of where the
// first mismatch sits.
inline bool constant_time_equal(std::string_view a, std::string_view b) {
  unsigned char acc = (a.size() == b.size()) ? 0 : 1;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char ca = i < a.size() ? static_cast<unsigned char>(a[i]) : 0;
    const unsigned char cb = i < b.size() ? static_cast<unsigned char>(b[i]) : 0;
    acc = static_cast<unsigned char>(acc | (ca ^ cb));
  }
  return acc == 0;
}

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::string token;  // shared bearer credential, >= 16 chars; never logged
  std::filesystem::path data_dir = "data";
  ThresholdTable thresholds;
  bool fsync_appends = true;
};

inline std::vector<std::string> validate(const ServiceConfig& c) {
  std::vector<std::string> v;
  if (c.token.size() < kMinTokenLength)
    v.push_back("token: must be at least 16 characters");
  if (c.data_dir.empty()) v.push_back("data_dir: must not be empty");
  if (c.port < 0 || c.port > 65535)
    v.push_back("port: must be in [0, 65535] (0 binds an ephemeral port)");
  for (const auto& m : validate(c.thresholds)) v.push_back(m);
  return v;
}

inline void to_json(nlohmann::json& j, const ServiceConfig& c) {
  j = {{"bind_address", c.bind_address}, {"port", c.port},
       {"token", c.token},               {"data_dir", c.data_dir.string()},
       {"thresholds", c.thresholds},     {"fsync", c.fsync_appends}};
}

inline void from_json(const nlohmann::json& j, ServiceConfig& c) {
  c.bind_address = j.value("bind_address", c.bind_address);
  c.port = j.value("port", c.port);
  c.token = j.value("token", "");
  c.data_dir = j.value("data_dir", c.data_dir.string());
  if (j.contains("thresholds")) from_json(j["thresholds"], c.thresholds);
  c.fsync_appends = j.value("fsync", c.fsync_appends);
}

struct IngestResult {
  int status = 200;        // HTTP status this maps to
  std::string error;       // machine-readable code when status != 200
  std::string detail;
  std::uint64_t storage_seq = 0;
  bool duplicate = false;
};

struct HourlyBucket {
  std::int64_t hour_start_s = 0;
  double lpg_mean = 0.0;
  double co_mean = 0.0;
  std::uint64_t count = 0;
};

inline std::int64_t floor_hour(std::int64_t ts) {
  const std::int64_t h = (ts >= 0) ? ts / 3600 : -((-ts + 3599) / 3600);
  return h * 3600;
}

// Arithmetic mean per aligned 3600 s bucket; empty buckets omitted. Shared by
// the service endpoint and the offline report path so both agree bit-for-bit.
inline std::vector<HourlyBucket> hourly_from_readings(
    const std::vector<storage::StoredReading>& rows) {
  std::map<std::int64_t, HourlyBucket> buckets;
  for (const auto& r : rows) {
    const std::int64_t start = floor_hour(r.payload.ts);
    auto& b = buckets[start];
    b.hour_start_s = start;
    b.lpg_mean += r.payload.lpg_ppm;  // accumulate; divide below
    b.co_mean += r.payload.co_ppm;
    b.count += 1;
  }
  std::vector<HourlyBucket> out;
  for (auto& [_, b] : buckets) {
    b.lpg_mean /= static_cast<double>(b.count);
    b.co_mean /= static_cast<double>(b.count);
    out.push_back(b);
  }
  return out;
}

struct StationSummary {
  std::string station_id;
  std::uint64_t readings = 0;
  std::int64_t first_ts = 0;
  std::int64_t last_ts = 0;
};

class ServiceCore {
 public:
  explicit ServiceCore(ServiceConfig cfg)
      : cfg_(validated(std::move(cfg))),
        store_(storage::StoreConfig{cfg_.data_dir, cfg_.fsync_appends,
                                    /*segment_roll=*/10000}) {}

  const ServiceConfig& config() const { return cfg_; }
  storage::Store& store() { return store_; }

  // Accepts exactly `Bearer <token>`.
  bool authenticate(std::optional<std::string_view> auth_header) const {
    if (!auth_header) return false;
    constexpr std::string_view scheme = "Bearer ";
    if (auth_header->size() < scheme.size() ||
        auth_header->substr(0, scheme.size()) != scheme)
      return false;
    return constant_time_equal(auth_header->substr(scheme.size()), cfg_.token);
  }

  // Full ingest path: auth, size, parse, validate, dedup, append, alerts.
  IngestResult ingest(std::string_view body,
                      std::optional<std::string_view> auth_header,
                      std::int64_t received_at_s) {
    if (!authenticate(auth_header))
      return {401, "unauthorized", "missing or invalid bearer token", 0, false};
    if (body.size() > kMaxIngestBodyBytes)
      return {413, "payload_too_large",
              "body exceeds " + std::to_string(kMaxIngestBodyBytes) + " bytes", 0, false};

    TelemetryPayload p;
    try {
      p = parse_payload(body);
    } catch (const ParseError& e) {
      return {400, "bad_request", e.what(), 0, false};
    }
    if (auto err = validate_payload(p)) return {400, "bad_request", *err, 0, false};

    std::lock_guard lk(ingest_mu_);  // single appender: check+append is atomic
    if (auto dup = store_.find_duplicate(p.station_id, p.seq))
      return {200, "", "", *dup, true};

    const auto last = store_.last_reading(p.station_id);
    if (last && p.ts < last->payload.ts)
      return {400, "non_monotonic_ts",
              "ts " + std::to_string(p.ts) + " precedes stored ts " +
                  std::to_string(last->payload.ts),
              0, false};

    // The cloud is the system of record: alert levels come from our own
    // thresholds, not the station's flag. The flag is stored and cross-checked.
    const bool computed_alarm =
        above_threshold(cfg_.thresholds, p.lpg_ppm, p.co_ppm);
    if (computed_alarm != p.alarm) {
      alarm_flag_mismatches_.fetch_add(1, std::memory_order_relaxed);
      std::cerr << "warning: station " << p.station_id << " seq " << p.seq
                << " alarm flag disagrees with service thresholds\n";
    }

    StoredReadingAppendResult res;
    try {
      res = append_with_alerts(p, last, received_at_s);
    } catch (const IoFailure& e) {
      return {503, "storage_unavailable", e.what(), 0, false};
    }
    return {200, "", "", res.storage_seq, false};
  }

  std::vector<storage::StoredReading> query_readings(const std::string& station,
                                                     std::int64_t from_s,
                                                     std::int64_t to_s,
                                                     std::uint64_t limit) const {
    check_range(from_s, to_s);
    if (limit > kMaxQueryLimit)
      throw OutOfRange("limit exceeds " + std::to_string(kMaxQueryLimit));
    if (limit == 0) limit = kMaxQueryLimit;
    auto rows = store_.scan(station, from_s, to_s);
    if (rows.size() > limit) rows.resize(limit);
    return rows;
  }

  std::vector<HourlyBucket> hourly_aggregate(const std::string& station,
                                             std::int64_t from_s,
                                             std::int64_t to_s) const {
    check_range(from_s, to_s);
    return hourly_from_readings(store_.scan(station, from_s, to_s));
  }

  std::vector<storage::AlertRecord> query_alerts(std::int64_t from_s,
                                                 std::int64_t to_s) const {
    check_range(from_s, to_s);
    return store_.alerts(from_s, to_s);
  }

  std::vector<StationSummary> station_summaries() const {
    std::vector<StationSummary> out;
    for (const auto& id : store_.stations()) {
      const auto rows = store_.scan(id, std::numeric_limits<std::int64_t>::min(),
                                    std::numeric_limits<std::int64_t>::max());
      StationSummary s;
      s.station_id = id;
      s.readings = rows.size();
      if (!rows.empty()) {
        s.first_ts = rows.front().payload.ts;
        s.last_ts = rows.back().payload.ts;
      }
      out.push_back(std::move(s));
    }
    return out;
  }

  std::uint64_t alarm_flag_mismatches() const {
    return alarm_flag_mismatches_.load(std::memory_order_relaxed);
  }

  void close() { store_.close(); }

 private:
  struct StoredReadingAppendResult {
    std::uint64_t storage_seq = 0;
  };

  static ServiceConfig validated(ServiceConfig cfg) {
    auto violations = validate(cfg);
    if (!violations.empty()) {
      std::string msg = "invalid service config: ";
      for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) msg += "; ";
        msg += violations[i];
      }
      throw InvalidConfig(msg);
    }
    return cfg;
  }

  static void check_range(std::int64_t from_s, std::int64_t to_s) {
    if (from_s > to_s) throw OutOfRange("inverted range: from > to");
  }

  static std::optional<std::string> validate_payload(const TelemetryPayload& p) {
    if (!valid_station_id(p.station_id))
      return "station_id must be 1-64 chars of [A-Za-z0-9._-]";
    if (!(p.lpg_ppm >= kPpmFloor && p.lpg_ppm <= kPpmCeil))
      return "lpg_ppm outside [0, 1000]";
    if (!(p.co_ppm >= kPpmFloor && p.co_ppm <= kPpmCeil))
      return "co_ppm outside [0, 1000]";
    if (p.temp_c && !(*p.temp_c >= kTempMinC && *p.temp_c <= kTempMaxC))
      return "temp_c outside [-40, 85]";
    if (!is_level_name(GasSpecies::LPG, p.lpg_level)) return "unknown lpg_level";
    if (!is_level_name(GasSpecies::CO, p.co_level)) return "unknown co_level";
    return std::nullopt;
  }

  StoredReadingAppendResult append_with_alerts(
      const TelemetryPayload& p, const std::optional<storage::StoredReading>& prev,
      std::int64_t received_at_s) {
    const auto rec = store_.append_reading(p, received_at_s);
    for (GasSpecies g : kAllSpecies) {
      const double ppm = (g == GasSpecies::LPG) ? p.lpg_ppm : p.co_ppm;
      const double prev_ppm =
          prev ? ((g == GasSpecies::LPG) ? prev->payload.lpg_ppm : prev->payload.co_ppm)
               : 0.0;
      const HazardLevel prev_level =
          prev ? classify(cfg_.thresholds, g, prev_ppm) : HazardLevel::Normal;
      const HazardLevel level = classify(cfg_.thresholds, g, ppm);

      storage::AlertRecord a;
      a.station_id = p.station_id;
      a.t_s = p.ts;
      a.species = g;
      a.ppm = ppm;
      if (prev_level == HazardLevel::Normal && level > HazardLevel::Normal) {
        a.level = level;
        a.kind = storage::AlertKind::Onset;
        store_.append_alert(a);
      } else if (prev_level > HazardLevel::Normal && level > HazardLevel::Normal) {
        a.level = level;
        a.kind = storage::AlertKind::Ongoing;
        store_.append_alert(a);
      } else if (prev_level > HazardLevel::Normal && level == HazardLevel::Normal) {
        a.level = prev_level;  // the band being left
        a.kind = storage::AlertKind::Cleared;
        store_.append_alert(a);
      }
    }
    return {rec.storage_seq};
  }

  ServiceConfig cfg_;
  storage::Store store_;
  std::mutex ingest_mu_;
  std::atomic<std::uint64_t> alarm_flag_mismatches_{0};
};

}  // namespace gasnet
