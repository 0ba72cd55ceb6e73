// HTTP/1.1 surface over ServiceCore, plus the client used by the simulation
// harness and the report CLI in remote mode.
//
//   POST /v1/telemetry                         bearer auth required
//   GET  /v1/stations                          public
//   GET  /v1/stations/{id}/readings?from=&to=&limit=
//   GET  /v1/stations/{id}/hourly?from=&to=
//   GET  /v1/alerts?from=&to=
//   GET  /healthz
//
// Error bodies are {"error":"<code>","detail":"<text>"}. A payload posted
// with an X-Sim-Time header is timestamped with that virtual clock instead of
// wall time; simulations use this so stored bytes replay identically.
#pragma once

#include <cstdint>
#include <ctime>
#include <limits>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "gasnet/service.hpp"

namespace gasnet {

inline constexpr const char* kSimTimeHeader = "X-Sim-Time";

// Non-200 response on a read endpoint; callers branch on the status code.
struct HttpStatusError : std::runtime_error {
  HttpStatusError(int status_, const std::string& msg)
      : std::runtime_error(msg), status(status_) {}
  int status;
};

namespace detail {

inline std::optional<std::int64_t> parse_int64(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace detail

class HttpApi {
 public:
  explicit HttpApi(ServiceCore& core) : core_(core) { install_routes(); }

  bool bind(const std::string& host, int port) { return svr_.bind_to_port(host, port); }

  int bind_any_port(const std::string& host) { return svr_.bind_to_any_port(host); }

  bool listen_after_bind() { return svr_.listen_after_bind(); }

  void stop() { svr_.stop(); }

  bool is_running() const { return svr_.is_running(); }

  void wait_until_ready() const { svr_.wait_until_ready(); }

 private:
  static void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void reply_error(httplib::Response& res, int status, const std::string& code,
                          const std::string& detail) {
    reply_json(res, status, nlohmann::json{{"error", code}, {"detail", detail}});
  }

  struct Range {
    std::int64_t from = 0;
    std::int64_t to = std::numeric_limits<std::int64_t>::max();
    std::uint64_t limit = 0;
    std::optional<std::string> bad_param;
  };

  static Range parse_range(const httplib::Request& req) {
    Range r;
    if (req.has_param("from")) {
      if (auto v = detail::parse_int64(req.get_param_value("from")))
        r.from = *v;
      else
        r.bad_param = "from";
    }
    if (req.has_param("to")) {
      if (auto v = detail::parse_int64(req.get_param_value("to")))
        r.to = *v;
      else
        r.bad_param = "to";
    }
    if (req.has_param("limit")) {
      auto v = detail::parse_int64(req.get_param_value("limit"));
      if (v && *v >= 0)
        r.limit = static_cast<std::uint64_t>(*v);
      else
        r.bad_param = "limit";
    }
    return r;
  }

  void install_routes() {
    svr_.Post("/v1/telemetry", [this](const httplib::Request& req, httplib::Response& res) {
      std::string auth_value;  // keeps the header bytes alive for the view below
      std::optional<std::string_view> auth;
      if (req.has_header("Authorization")) {
        auth_value = req.get_header_value("Authorization");
        auth = auth_value;
      }

      std::int64_t received_at = static_cast<std::int64_t>(std::time(nullptr));
      if (req.has_header(kSimTimeHeader)) {
        auto v = detail::parse_int64(req.get_header_value(kSimTimeHeader));
        if (!v) {
          reply_error(res, 400, "bad_request", "invalid X-Sim-Time header");
          return;
        }
        received_at = *v;
      }

      const IngestResult r = core_.ingest(req.body, auth, received_at);
      if (r.status == 200)
        reply_json(res, 200,
                   nlohmann::json{{"storage_seq", r.storage_seq}, {"duplicate", r.duplicate}});
      else
        reply_error(res, r.status, r.error, r.detail);
    });

    svr_.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      std::uint64_t readings = core_.store().total_readings();
      reply_json(res, 200,
                 nlohmann::json{{"status", "ok"},
                                {"stations", core_.store().stations().size()},
                                {"readings", readings},
                                {"alerts", core_.store().total_alerts()},
                                {"alarm_flag_mismatches", core_.alarm_flag_mismatches()}});
    });

    svr_.Get("/v1/stations", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& s : core_.station_summaries())
        out.push_back({{"station_id", s.station_id},
                       {"readings", s.readings},
                       {"first_ts", s.first_ts},
                       {"last_ts", s.last_ts}});
      reply_json(res, 200, out);
    });

    svr_.Get("/v1/stations/:id/readings",
             [this](const httplib::Request& req, httplib::Response& res) {
               const Range r = parse_range(req);
               if (r.bad_param) {
                 reply_error(res, 400, "bad_request", "invalid parameter: " + *r.bad_param);
                 return;
               }
               try {
                 auto rows = core_.query_readings(req.path_params.at("id"), r.from, r.to,
                                                  r.limit);
                 nlohmann::json out = nlohmann::json::array();
                 for (const auto& row : rows)
                   out.push_back(nlohmann::json::parse(storage::to_line(row)));
                 reply_json(res, 200, out);
               } catch (const storage::UnknownStation& e) {
                 reply_error(res, 404, "unknown_station", e.what());
               } catch (const OutOfRange& e) {
                 reply_error(res, 400, "bad_request", e.what());
               }
             });

    svr_.Get("/v1/stations/:id/hourly",
             [this](const httplib::Request& req, httplib::Response& res) {
               const Range r = parse_range(req);
               if (r.bad_param) {
                 reply_error(res, 400, "bad_request", "invalid parameter: " + *r.bad_param);
                 return;
               }
               try {
                 auto buckets = core_.hourly_aggregate(req.path_params.at("id"), r.from, r.to);
                 nlohmann::json out = nlohmann::json::array();
                 for (const auto& b : buckets)
                   out.push_back({{"hour_start_s", b.hour_start_s},
                                  {"lpg_ppm_mean", b.lpg_mean},
                                  {"co_ppm_mean", b.co_mean},
                                  {"count", b.count}});
                 reply_json(res, 200, out);
               } catch (const storage::UnknownStation& e) {
                 reply_error(res, 404, "unknown_station", e.what());
               } catch (const OutOfRange& e) {
                 reply_error(res, 400, "bad_request", e.what());
               }
             });

    svr_.Get("/v1/alerts", [this](const httplib::Request& req, httplib::Response& res) {
      const Range r = parse_range(req);
      if (r.bad_param) {
        reply_error(res, 400, "bad_request", "invalid parameter: " + *r.bad_param);
        return;
      }
      try {
        auto alerts = core_.query_alerts(r.from, r.to);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& a : alerts)
          out.push_back(nlohmann::json::parse(storage::to_line(a)));
        reply_json(res, 200, out);
      } catch (const OutOfRange& e) {
        reply_error(res, 400, "bad_request", e.what());
      }
    });
  }

  ServiceCore& core_;
  httplib::Server svr_;
};

// ---------------------------------------------------------------------------
// Client side.

class TelemetryClient {
 public:
  TelemetryClient(const std::string& base_url, std::string token = "")
      : cli_(base_url), token_(std::move(token)) {
    cli_.set_connection_timeout(5, 0);
    cli_.set_read_timeout(10, 0);
  }

  struct PostResult {
    bool transport_ok = false;
    int status = 0;
    std::string body;
  };

  PostResult post_telemetry(const std::string& payload_bytes,
                            std::optional<std::int64_t> sim_time_s) {
    httplib::Headers headers{{"Authorization", "Bearer " + token_}};
    if (sim_time_s) headers.emplace(kSimTimeHeader, std::to_string(*sim_time_s));
    auto res = cli_.Post("/v1/telemetry", headers, payload_bytes, "application/json");
    if (!res) return {false, 0, httplib::to_string(res.error())};
    return {true, res->status, res->body};
  }

  // Read endpoints are public; no credential attached.
  nlohmann::json get_json(const std::string& path) {
    auto res = cli_.Get(path);
    if (!res) throw IoFailure("GET " + path + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw HttpStatusError(res->status, "GET " + path + " -> HTTP " +
                                             std::to_string(res->status) + ": " + res->body);
    return nlohmann::json::parse(res->body);
  }

  std::vector<storage::StoredReading> fetch_readings(const std::string& station,
                                                     std::int64_t from, std::int64_t to,
                                                     std::uint64_t limit = 0) {
    std::string path = "/v1/stations/" + station + "/readings?from=" + std::to_string(from) +
                       "&to=" + std::to_string(to);
    if (limit) path += "&limit=" + std::to_string(limit);
    std::vector<storage::StoredReading> out;
    for (const auto& j : get_json(path)) out.push_back(storage::stored_reading_from_json(j));
    return out;
  }

  std::vector<HourlyBucket> fetch_hourly(const std::string& station, std::int64_t from,
                                         std::int64_t to) {
    const auto j = get_json("/v1/stations/" + station + "/hourly?from=" +
                            std::to_string(from) + "&to=" + std::to_string(to));
    std::vector<HourlyBucket> out;
    for (const auto& b : j)
      out.push_back({b.at("hour_start_s").get<std::int64_t>(),
                     b.at("lpg_ppm_mean").get<double>(), b.at("co_ppm_mean").get<double>(),
                     b.at("count").get<std::uint64_t>()});
    return out;
  }

  std::vector<storage::AlertRecord> fetch_alerts(std::int64_t from, std::int64_t to) {
    const auto j =
        get_json("/v1/alerts?from=" + std::to_string(from) + "&to=" + std::to_string(to));
    std::vector<storage::AlertRecord> out;
    for (const auto& a : j) out.push_back(storage::alert_from_json(a));
    return out;
  }

  nlohmann::json fetch_stations() { return get_json("/v1/stations"); }

 private:
  httplib::Client cli_;
  std::string token_;
};

}  // namespace gasnet
