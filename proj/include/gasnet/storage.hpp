// Durable append-only persistence: one ndjson segment stream per station for
// readings, one shared ndjson log for alerts.
//
//   <data>/<station_id>/readings-<n>.ndjson     (segments roll at 10000 lines)
//   <data>/alerts.ndjson
//
// Each line is the canonical payload JSON with the server-assigned fields
// appended, so the files double as the export format and a store written by
// one process is byte-reproducible by another. Crash consistency: a torn
// trailing line (interrupted write) is detected on recovery, dropped, and the
// file is truncated back to the last complete record. An invalid line
// anywhere else is real corruption and refuses to load.
#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "gasnet/errors.hpp"
#include "gasnet/telemetry.hpp"

namespace gasnet::storage {

struct UnknownStation : std::runtime_error {
  explicit UnknownStation(const std::string& id)
      : std::runtime_error("unknown station: " + id) {}
};

// ---------------------------------------------------------------------------
// Record schemas.

struct StoredReading {
  TelemetryPayload payload;
  std::int64_t received_at_s = 0;
  std::uint64_t storage_seq = 0;

  bool operator==(const StoredReading&) const = default;
};

enum class AlertKind { Onset, Ongoing, Cleared };

inline const char* alert_kind_name(AlertKind k) {
  switch (k) {
    case AlertKind::Onset: return "ONSET";
    case AlertKind::Ongoing: return "ONGOING";
    case AlertKind::Cleared: return "CLEARED";
  }
  return "ONSET";
}

struct AlertRecord {
  std::string station_id;
  std::int64_t t_s = 0;
  GasSpecies species = GasSpecies::LPG;
  double ppm = 0.0;
  HazardLevel level = HazardLevel::Elevated;  // band involved; > Normal
  AlertKind kind = AlertKind::Onset;
  std::uint64_t storage_seq = 0;

  bool operator==(const AlertRecord&) const = default;
};

inline std::string to_line(const StoredReading& r) {
  std::string line = to_wire(r.payload);
  line.pop_back();  // reopen the object to append server fields
  line += ",\"received_at_s\":" + std::to_string(r.received_at_s);
  line += ",\"storage_seq\":" + std::to_string(r.storage_seq);
  line += '}';
  return line;
}

inline StoredReading stored_reading_from_json(const nlohmann::json& j) {
  StoredReading r;
  r.payload = payload_from_json(j);
  r.received_at_s = detail::require_int(j, "received_at_s");
  const std::int64_t seq = detail::require_int(j, "storage_seq");
  if (seq <= 0) throw ParseError("storage_seq must be >= 1");
  r.storage_seq = static_cast<std::uint64_t>(seq);
  return r;
}

inline std::string to_line(const AlertRecord& a) {
  std::string line;
  line.reserve(128);
  line += "{\"station_id\":";
  json_append_escaped(line, a.station_id);
  line += ",\"ts\":" + std::to_string(a.t_s);
  line += ",\"species\":\"";
  line += species_name(a.species);
  line += "\",\"ppm\":" + format_1dp(a.ppm);
  line += ",\"level\":\"";
  line += level_name(a.species, a.level);
  line += "\",\"kind\":\"";
  line += alert_kind_name(a.kind);
  line += "\",\"storage_seq\":" + std::to_string(a.storage_seq);
  line += '}';
  return line;
}

inline AlertRecord alert_from_json(const nlohmann::json& j) {
  AlertRecord a;
  a.station_id = detail::require_string(j, "station_id");
  a.t_s = detail::require_int(j, "ts");
  const std::string sp = detail::require_string(j, "species");
  if (sp == "LPG")
    a.species = GasSpecies::LPG;
  else if (sp == "CO")
    a.species = GasSpecies::CO;
  else
    throw ParseError("unknown species: " + sp);
  a.ppm = detail::require_number(j, "ppm");
  const std::string lv = detail::require_string(j, "level");
  bool found = false;
  for (HazardLevel l : {HazardLevel::Normal, HazardLevel::Elevated, HazardLevel::Critical})
    if (lv == level_name(a.species, l)) {
      a.level = l;
      found = true;
    }
  if (!found) throw ParseError("unknown level: " + lv);
  const std::string kd = detail::require_string(j, "kind");
  if (kd == "ONSET")
    a.kind = AlertKind::Onset;
  else if (kd == "ONGOING")
    a.kind = AlertKind::Ongoing;
  else if (kd == "CLEARED")
    a.kind = AlertKind::Cleared;
  else
    throw ParseError("unknown alert kind: " + kd);
  a.storage_seq = static_cast<std::uint64_t>(detail::require_int(j, "storage_seq"));
  return a;
}

// ---------------------------------------------------------------------------
// ndjson segment reading (shared by the live store and read-only tools).

namespace fsys = std::filesystem;

// Parses every line of an ndjson file. If `repair` is set and the final line
// is torn (invalid JSON or unterminated), the file is truncated back to the
// last good record; read-only callers just skip it.
inline std::vector<nlohmann::json> read_ndjson(const fsys::path& path, bool tail_may_tear,
                                               bool repair) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  in.close();

  std::vector<nlohmann::json> out;
  std::size_t pos = 0;
  bool patched_terminator = false;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    const bool unterminated = (nl == std::string::npos);
    std::string_view line(contents.data() + pos,
                          (unterminated ? contents.size() : nl) - pos);
    const std::size_t next = unterminated ? contents.size() : nl + 1;
    const bool is_last = next >= contents.size();

    if (!line.empty()) {
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        if (is_last && tail_may_tear) {
          if (repair) {
            fsys::resize_file(path, pos);
          }
          break;
        }
        throw IoFailure("corrupt record in " + path.string());
      }
      if (unterminated && is_last && repair) {
        // Complete record that lost its newline; patch so the next append
        // does not glue onto it.
        std::ofstream app(path, std::ios::binary | std::ios::app);
        app << '\n';
        patched_terminator = true;
      }
      out.push_back(std::move(j));
    }
    pos = next;
  }
  (void)patched_terminator;
  return out;
}

inline std::vector<fsys::path> list_segments(const fsys::path& station_dir) {
  std::map<unsigned long, fsys::path> by_index;
  for (const auto& entry : fsys::directory_iterator(station_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("readings-", 0) != 0) continue;
    if (entry.path().extension() != ".ndjson") continue;
    const std::string digits = name.substr(9, name.size() - 9 - 7);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      continue;
    by_index[std::stoul(digits)] = entry.path();
  }
  std::vector<fsys::path> out;
  for (auto& [_, p] : by_index) out.push_back(std::move(p));
  return out;
}

inline std::string segment_name(unsigned long index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "readings-%06lu.ndjson", index);
  return buf;
}

// ---------------------------------------------------------------------------
// Read-only access to a data directory (CLI local mode, offline inspection).

inline std::vector<std::string> list_stations(const fsys::path& data_dir) {
  std::vector<std::string> out;
  if (!fsys::exists(data_dir)) return out;
  for (const auto& entry : fsys::directory_iterator(data_dir))
    if (entry.is_directory()) out.push_back(entry.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<StoredReading> read_station_readings(const fsys::path& data_dir,
                                                        const std::string& station) {
  const fsys::path dir = data_dir / station;
  if (!valid_station_id(station) || !fsys::is_directory(dir))
    throw UnknownStation(station);
  std::vector<StoredReading> out;
  const auto segments = list_segments(dir);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const bool last = (i + 1 == segments.size());
    for (const auto& j : read_ndjson(segments[i], last, /*repair=*/false))
      out.push_back(stored_reading_from_json(j));
  }
  return out;
}

inline std::vector<AlertRecord> read_alerts(const fsys::path& data_dir) {
  const fsys::path path = data_dir / "alerts.ndjson";
  std::vector<AlertRecord> out;
  if (!fsys::exists(path)) return out;
  for (const auto& j : read_ndjson(path, true, /*repair=*/false))
    out.push_back(alert_from_json(j));
  return out;
}

// ---------------------------------------------------------------------------
// Live store.

struct StoreConfig {
  fsys::path data_dir;
  bool fsync_appends = true;
  std::uint64_t segment_roll = 10000;
};

// Append-only store with an in-memory mirror for serving reads. Appends are
// durable (write + optional fsync) before they return. Thread contract: any
// number of concurrent readers, appends serialized by the caller per station;
// internally a writer lock keeps cross-station appends safe too.
class Store {
 public:
  explicit Store(StoreConfig cfg) : cfg_(std::move(cfg)) {
    fsys::create_directories(cfg_.data_dir);
    recover();
  }

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  std::uint64_t next_storage_seq() const {
    std::shared_lock lk(mu_);
    return next_seq_;
  }

  // Appends one validated reading; assigns the storage sequence number.
  StoredReading append_reading(const TelemetryPayload& p, std::int64_t received_at_s) {
    std::unique_lock lk(mu_);
    StationLog& log = station_log_locked(p.station_id);
    StoredReading rec{p, received_at_s, next_seq_};
    append_line_locked(log, to_line(rec));
    next_seq_ += 1;
    log.seq_to_storage.emplace(p.seq, rec.storage_seq);
    log.readings.push_back(rec);
    return rec;
  }

  AlertRecord append_alert(AlertRecord a) {
    std::unique_lock lk(mu_);
    a.storage_seq = next_seq_;
    const std::string line = to_line(a);
    if (alerts_fd_ < 0) alerts_fd_ = open_append(cfg_.data_dir / "alerts.ndjson");
    write_line(alerts_fd_, line);
    next_seq_ += 1;
    alerts_.push_back(a);
    return a;
  }

  bool has_station(const std::string& id) const {
    std::shared_lock lk(mu_);
    return stations_.count(id) > 0;
  }

  std::vector<std::string> stations() const {
    std::shared_lock lk(mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : stations_) out.push_back(id);
    return out;
  }

  // Existing storage_seq for a (station, payload seq) pair, if already stored.
  std::optional<std::uint64_t> find_duplicate(const std::string& station,
                                              std::uint64_t payload_seq) const {
    std::shared_lock lk(mu_);
    auto st = stations_.find(station);
    if (st == stations_.end()) return std::nullopt;
    auto it = st->second.seq_to_storage.find(payload_seq);
    if (it == st->second.seq_to_storage.end()) return std::nullopt;
    return it->second;
  }

  std::optional<StoredReading> last_reading(const std::string& station) const {
    std::shared_lock lk(mu_);
    auto st = stations_.find(station);
    if (st == stations_.end() || st->second.readings.empty()) return std::nullopt;
    return st->second.readings.back();
  }

  // Readings with from_s <= ts <= to_s, ascending ts (stable in append order).
  std::vector<StoredReading> scan(const std::string& station, std::int64_t from_s,
                                  std::int64_t to_s) const {
    std::shared_lock lk(mu_);
    auto st = stations_.find(station);
    if (st == stations_.end()) throw UnknownStation(station);
    const auto& rs = st->second.readings;
    auto lo = std::lower_bound(rs.begin(), rs.end(), from_s,
                               [](const StoredReading& r, std::int64_t t) {
                                 return r.payload.ts < t;
                               });
    std::vector<StoredReading> out;
    for (auto it = lo; it != rs.end() && it->payload.ts <= to_s; ++it)
      out.push_back(*it);
    return out;
  }

  std::uint64_t reading_count(const std::string& station) const {
    std::shared_lock lk(mu_);
    auto st = stations_.find(station);
    return st == stations_.end() ? 0 : st->second.readings.size();
  }

  std::uint64_t total_readings() const {
    std::shared_lock lk(mu_);
    std::uint64_t n = 0;
    for (const auto& [_, log] : stations_) n += log.readings.size();
    return n;
  }

  // Alerts across all stations with from_s <= t_s <= to_s, ascending t_s.
  std::vector<AlertRecord> alerts(std::int64_t from_s, std::int64_t to_s) const {
    std::shared_lock lk(mu_);
    std::vector<AlertRecord> out;
    for (const auto& a : alerts_)
      if (a.t_s >= from_s && a.t_s <= to_s) out.push_back(a);
    std::stable_sort(out.begin(), out.end(),
                     [](const AlertRecord& x, const AlertRecord& y) { return x.t_s < y.t_s; });
    return out;
  }

  std::uint64_t total_alerts() const {
    std::shared_lock lk(mu_);
    return alerts_.size();
  }

  // Flushes and closes every file handle. The store stays queryable.
  void close() {
    std::unique_lock lk(mu_);
    for (auto& [_, log] : stations_) close_fd(log.fd);
    close_fd(alerts_fd_);
  }

  ~Store() { close(); }

 private:
  struct StationLog {
    fsys::path dir;
    std::vector<StoredReading> readings;
    std::unordered_map<std::uint64_t, std::uint64_t> seq_to_storage;
    unsigned long segment_index = 1;
    std::uint64_t records_in_segment = 0;
    int fd = -1;
  };

  int open_append(const fsys::path& path) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd < 0) throw IoFailure("cannot open for append: " + path.string());
    return fd;
  }

  void write_line(int fd, const std::string& line) {
    std::string buf = line;
    buf += '\n';
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::write(fd, buf.data() + off, buf.size() - off);
      if (n < 0) throw IoFailure("write failed");
      off += static_cast<std::size_t>(n);
    }
    if (cfg_.fsync_appends && ::fsync(fd) != 0) throw IoFailure("fsync failed");
  }

  static void close_fd(int& fd) {
    if (fd >= 0) {
      ::close(fd);
      fd = -1;
    }
  }

  StationLog& station_log_locked(const std::string& id) {
    auto it = stations_.find(id);
    if (it != stations_.end()) return it->second;
    StationLog log;
    log.dir = cfg_.data_dir / id;
    fsys::create_directories(log.dir);
    return stations_.emplace(id, std::move(log)).first->second;
  }

  void append_line_locked(StationLog& log, const std::string& line) {
    if (log.records_in_segment >= cfg_.segment_roll) {
      close_fd(log.fd);
      log.segment_index += 1;
      log.records_in_segment = 0;
    }
    if (log.fd < 0) log.fd = open_append(log.dir / segment_name(log.segment_index));
    write_line(log.fd, line);
    log.records_in_segment += 1;
  }

  void recover() {
    next_seq_ = 1;
    for (const auto& id : list_stations(cfg_.data_dir)) {
      const fsys::path dir = cfg_.data_dir / id;
      StationLog log;
      log.dir = dir;
      const auto segments = list_segments(dir);
      for (std::size_t i = 0; i < segments.size(); ++i) {
        const bool last = (i + 1 == segments.size());
        const auto docs = read_ndjson(segments[i], last, /*repair=*/true);
        for (const auto& j : docs) {
          StoredReading r = stored_reading_from_json(j);
          next_seq_ = std::max(next_seq_, r.storage_seq + 1);
          log.seq_to_storage.emplace(r.payload.seq, r.storage_seq);
          log.readings.push_back(std::move(r));
        }
        if (last) {
          const std::string name = segments[i].filename().string();
          log.segment_index = std::stoul(name.substr(9, name.size() - 9 - 7));
          log.records_in_segment = docs.size();
        }
      }
      stations_.emplace(id, std::move(log));
    }
    const fsys::path alerts_path = cfg_.data_dir / "alerts.ndjson";
    if (fsys::exists(alerts_path)) {
      for (const auto& j : read_ndjson(alerts_path, true, /*repair=*/true)) {
        AlertRecord a = alert_from_json(j);
        next_seq_ = std::max(next_seq_, a.storage_seq + 1);
        alerts_.push_back(std::move(a));
      }
    }
  }

  StoreConfig cfg_;
  mutable std::shared_mutex mu_;
  std::map<std::string, StationLog> stations_;  // ordered: deterministic listings
  std::vector<AlertRecord> alerts_;
  std::uint64_t next_seq_ = 1;
  int alerts_fd_ = -1;
};

}  // namespace gasnet::storage
