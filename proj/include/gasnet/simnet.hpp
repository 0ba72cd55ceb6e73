// Deterministic discrete-time runner: scenario concentrations drive simulated
// sensor ADCs, station firmware emits payloads, payloads pass a lossy link
// model, survivors are ingested by the real service (in-process call or live
// HTTP, selectable per run).
//
// Everything is driven by a virtual integer-second clock, so a 24 h run takes
// milliseconds and two runs of the same config produce byte-identical reports
// and byte-identical stores. Wall-clock duration is measured for operator
// logging only and never enters the canonical report bytes.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gasnet/errors.hpp"
#include "gasnet/gas_model.hpp"
#include "gasnet/http_api.hpp"
#include "gasnet/prng.hpp"
#include "gasnet/service.hpp"
#include "gasnet/station.hpp"

namespace gasnet {

// ---------------------------------------------------------------------------
// Link model.

struct LinkModel {
  double loss_prob = 0.0;  // default lossless; loss is opt-in per config
  std::int64_t latency_s = 0;
  int max_retries = 0;
  std::int64_t retry_backoff_s = 1;
  std::uint64_t seed = 0;
};

inline std::vector<std::string> validate(const LinkModel& l) {
  std::vector<std::string> v;
  if (!(l.loss_prob >= 0.0 && l.loss_prob <= 1.0))
    v.push_back("link.loss_prob must be within [0, 1]");
  if (l.latency_s < 0) v.push_back("link.latency_s must be >= 0");
  if (l.max_retries < 0) v.push_back("link.max_retries must be >= 0");
  if (l.retry_backoff_s <= 0) v.push_back("link.retry_backoff_s must be > 0");
  return v;
}

struct DeliveryOutcome {
  bool delivered = false;
  std::int64_t latency_s = 0;
};

// One transmission attempt. Independent Bernoulli(loss_prob) draw from the
// caller's rng; attempt_index only bounds-checks against the retry budget.
inline DeliveryOutcome attempt_delivery(const LinkModel& link, int attempt_index,
                                        SplitMix64& rng) {
  if (attempt_index < 0 || attempt_index > link.max_retries)
    throw OutOfRange("attempt_index exceeds max_retries");
  const bool lost = rng.next_unit() < link.loss_prob;
  return {!lost, link.latency_s};
}

struct SendOutcome {
  int attempts = 0;  // 1..max_retries+1
  bool delivered = false;
  std::int64_t arrival_s = 0;  // meaningful only when delivered
};

// Full send with retries. The rng stream is keyed by (link seed, station,
// payload seq) so outcomes do not depend on global draw order. Attempt k goes
// out at send_s + k*backoff; on success the payload arrives latency_s later.
inline SendOutcome send_through_link(const LinkModel& link, const std::string& station_id,
                                     std::uint64_t payload_seq, std::int64_t send_s) {
  SplitMix64 rng(hash_combine(hash_combine(link.seed, fnv1a64(station_id)), payload_seq));
  SendOutcome out;
  for (int k = 0; k <= link.max_retries; ++k) {
    out.attempts = k + 1;
    const DeliveryOutcome a = attempt_delivery(link, k, rng);
    if (a.delivered) {
      out.delivered = true;
      out.arrival_s = send_s + static_cast<std::int64_t>(k) * link.retry_backoff_s +
                      a.latency_s;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation configuration.

enum class SimMode { InProcess, OverHttp };

struct SimStation {
  StationConfig config;
  Scenario scenario;
};

struct SimConfig {
  std::int64_t duration_s = 86400;
  SimMode mode = SimMode::InProcess;
  LinkModel link;
  ServiceConfig service;  // backend settings for in-process runs
  std::vector<SimStation> stations;
};

inline std::vector<std::string> validate(const SimConfig& c, SimMode effective_mode) {
  std::vector<std::string> v;
  if (c.duration_s <= 0) v.push_back("duration_s must be > 0");
  std::map<std::string, int> seen;
  for (const auto& st : c.stations) {
    if (++seen[st.config.station_id] == 2)
      v.push_back("duplicate station_id: " + st.config.station_id);
    for (const auto& m : validate(st.config))
      v.push_back("station " + st.config.station_id + ": " + m);
    for (const auto& m : validate(st.scenario))
      v.push_back("station " + st.config.station_id + " scenario: " + m);
  }
  for (const auto& m : validate(c.link)) v.push_back(m);
  if (effective_mode == SimMode::InProcess)
    for (const auto& m : validate(c.service)) v.push_back("service: " + m);
  return v;
}

// ---------------------------------------------------------------------------
// Station plan: the pure (service-free) half of a run.

// Ambient temperature for simulated boards: triangle wave between 20.0 C at
// 04:00 and 30.0 C at 16:00, repeating daily. Pure arithmetic, no libm.
inline double ambient_temp_c(std::int64_t t_s) {
  const std::int64_t day_s = ((t_s % 86400) + 86400) % 86400;
  double from_low_h = day_s / 3600.0 - 4.0;
  if (from_low_h < 0.0) from_low_h += 24.0;
  const double frac = from_low_h <= 12.0 ? from_low_h / 12.0 : (24.0 - from_low_h) / 12.0;
  return 20.0 + 10.0 * frac;
}

struct PlannedSend {
  std::string station_id;
  std::uint64_t seq = 0;
  std::int64_t send_s = 0;
  std::string wire;  // canonical payload bytes
  int attempts = 0;
  bool delivered = false;
  std::int64_t arrival_s = 0;
};

struct StationPlan {
  std::string station_id;
  std::uint64_t samples_taken = 0;
  std::vector<PlannedSend> sends;
};

// Boot offset so a fleet does not report in lockstep; stable per station id.
inline std::int64_t station_stagger_s(const StationConfig& c) {
  return static_cast<std::int64_t>(fnv1a64(c.station_id) %
                                   static_cast<std::uint64_t>(c.report_period_s));
}

// Runs one station's firmware loop over the scenario for [stagger, duration).
// The loop blocks during link retries (single-threaded firmware), so samples
// that would have landed inside a retry window are skipped.
inline StationPlan plan_station(const SimStation& sim, const LinkModel& link,
                                std::int64_t duration_s) {
  StationPlan plan;
  plan.station_id = sim.config.station_id;
  StationState st = boot(sim.config);
  std::int64_t t = station_stagger_s(sim.config);
  while (t < duration_s) {
    const double lpg = scenario_ppm(sim.scenario, GasSpecies::LPG, static_cast<double>(t));
    const double co = scenario_ppm(sim.scenario, GasSpecies::CO, static_cast<double>(t));
    const int adc_lpg = ppm_to_adc_saturating(sim.config.lpg_curve, lpg);
    const int adc_co = ppm_to_adc_saturating(sim.config.co_curve, co);
    std::optional<double> temp;
    if (sim.config.include_temperature) temp = ambient_temp_c(t);

    const auto actions = step(st, t, adc_lpg, adc_co, temp);
    plan.samples_taken += 1;

    std::int64_t next_t = t + sim.config.sample_period_s;
    for (const auto& a : actions) {
      const Send* send = std::get_if<Send>(&a);
      if (!send) continue;
      PlannedSend ps;
      ps.station_id = plan.station_id;
      ps.seq = send->payload.seq;
      ps.send_s = t;
      ps.wire = to_wire(send->payload);
      const SendOutcome out = send_through_link(link, ps.station_id, ps.seq, t);
      ps.attempts = out.attempts;
      ps.delivered = out.delivered;
      ps.arrival_s = out.arrival_s;
      plan.sends.push_back(std::move(ps));
      const std::int64_t unblocked_at =
          t + static_cast<std::int64_t>(out.attempts - 1) * link.retry_backoff_s;
      while (next_t <= unblocked_at) next_t += sim.config.sample_period_s;
    }
    t = next_t;
  }
  return plan;
}

inline std::vector<StationPlan> plan_simulation(const SimConfig& cfg) {
  std::vector<StationPlan> plans;
  plans.reserve(cfg.stations.size());
  for (const auto& st : cfg.stations) plans.push_back(plan_station(st, cfg.link, cfg.duration_s));
  return plans;
}

// Global ingest order: ascending arrival time, ties broken by station then
// seq. Per-station arrival order is already monotone, so this interleaving
// preserves each station's send order while fixing the cross-station order.
inline std::vector<const PlannedSend*> delivery_order(const std::vector<StationPlan>& plans) {
  std::vector<const PlannedSend*> order;
  for (const auto& p : plans)
    for (const auto& s : p.sends)
      if (s.delivered) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const PlannedSend* a, const PlannedSend* b) {
    if (a->arrival_s != b->arrival_s) return a->arrival_s < b->arrival_s;
    if (a->station_id != b->station_id) return a->station_id < b->station_id;
    return a->seq < b->seq;
  });
  return order;
}

// ---------------------------------------------------------------------------
// Report.

struct SimStationStats {
  std::string station_id;
  std::uint64_t samples_taken = 0;
  std::uint64_t payloads_sent = 0;
  std::uint64_t attempts = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost_after_retries = 0;
  std::uint64_t stored = 0;
  std::uint64_t alerts_onset = 0;
  std::uint64_t alerts_ongoing = 0;
  std::uint64_t alerts_cleared = 0;
};

struct SimReport {
  std::int64_t duration_s = 0;
  std::vector<SimStationStats> stations;  // ascending station_id
  double wall_time_s = 0.0;               // operator log only; not in report bytes
};

inline bool accounting_holds(const SimReport& r) {
  for (const auto& s : r.stations) {
    if (s.delivered + s.lost_after_retries != s.payloads_sent) return false;
    if (s.stored != s.delivered) return false;
  }
  return true;
}

inline nlohmann::ordered_json report_json(const SimReport& r) {
  auto station_obj = [](const SimStationStats& s) {
    return nlohmann::ordered_json{
        {"station_id", s.station_id},
        {"samples_taken", s.samples_taken},
        {"payloads_sent", s.payloads_sent},
        {"attempts", s.attempts},
        {"delivered", s.delivered},
        {"lost_after_retries", s.lost_after_retries},
        {"stored", s.stored},
        {"alerts",
         nlohmann::ordered_json{{"onset", s.alerts_onset},
                                {"ongoing", s.alerts_ongoing},
                                {"cleared", s.alerts_cleared}}}};
  };
  SimStationStats totals;
  nlohmann::ordered_json stations = nlohmann::ordered_json::array();
  for (const auto& s : r.stations) {
    stations.push_back(station_obj(s));
    totals.samples_taken += s.samples_taken;
    totals.payloads_sent += s.payloads_sent;
    totals.attempts += s.attempts;
    totals.delivered += s.delivered;
    totals.lost_after_retries += s.lost_after_retries;
    totals.stored += s.stored;
    totals.alerts_onset += s.alerts_onset;
    totals.alerts_ongoing += s.alerts_ongoing;
    totals.alerts_cleared += s.alerts_cleared;
  }
  nlohmann::ordered_json t = station_obj(totals);
  t.erase("station_id");
  return nlohmann::ordered_json{
      {"duration_s", r.duration_s}, {"stations", stations}, {"totals", t}};
}

inline std::string report_bytes(const SimReport& r) { return report_json(r).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Run drivers.

namespace detail {

struct IngestAck {
  int status = 0;
  std::string body;
};

// Shared tail of both drivers: plans stations, pushes deliveries through the
// supplied transport in deterministic order, then folds service-side truth
// (stored counts, alert tallies) into the report.
template <typename IngestFn, typename StoredCountFn, typename AlertsFn>
SimReport run_pipeline(const SimConfig& cfg, IngestFn ingest, StoredCountFn stored_count,
                       AlertsFn fetch_alerts) {
  const auto wall_start = std::chrono::steady_clock::now();

  const std::vector<StationPlan> plans = plan_simulation(cfg);
  for (const PlannedSend* ps : delivery_order(plans)) {
    const IngestAck ack = ingest(*ps);
    if (ack.status != 200)
      throw ContractViolation("service rejected payload (HTTP " +
                              std::to_string(ack.status) + "): " + ack.body +
                              " payload=" + ps->wire);
  }

  SimReport report;
  report.duration_s = cfg.duration_s;
  std::map<std::string, SimStationStats> by_id;
  for (const auto& p : plans) {
    SimStationStats s;
    s.station_id = p.station_id;
    s.samples_taken = p.samples_taken;
    for (const auto& send : p.sends) {
      s.payloads_sent += 1;
      s.attempts += static_cast<std::uint64_t>(send.attempts);
      if (send.delivered)
        s.delivered += 1;
      else
        s.lost_after_retries += 1;
    }
    s.stored = stored_count(p.station_id);
    by_id.emplace(s.station_id, std::move(s));
  }
  for (const storage::AlertRecord& a : fetch_alerts()) {
    auto it = by_id.find(a.station_id);
    if (it == by_id.end()) continue;  // pre-existing data from another run
    switch (a.kind) {
      case storage::AlertKind::Onset: it->second.alerts_onset += 1; break;
      case storage::AlertKind::Ongoing: it->second.alerts_ongoing += 1; break;
      case storage::AlertKind::Cleared: it->second.alerts_cleared += 1; break;
    }
  }
  for (auto& [_, s] : by_id) report.stations.push_back(std::move(s));

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

inline void require_valid(const SimConfig& cfg, SimMode mode) {
  const auto violations = validate(cfg, mode);
  if (violations.empty()) return;
  std::string msg = "invalid sim config: ";
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) msg += "; ";
    msg += violations[i];
  }
  throw InvalidConfig(msg);
}

}  // namespace detail

// In-process run: deliveries call the service core directly. The virtual
// arrival clock is passed as the received-at time, mirroring what the HTTP
// driver conveys via X-Sim-Time.
inline SimReport run_simulation(const SimConfig& cfg) {
  detail::require_valid(cfg, SimMode::InProcess);
  std::map<std::string, std::string> credential;
  for (const auto& st : cfg.stations)
    credential[st.config.station_id] = "Bearer " + st.config.api_credential;

  ServiceCore core(cfg.service);
  return detail::run_pipeline(
      cfg,
      [&](const PlannedSend& ps) {
        const IngestResult r =
            core.ingest(ps.wire, credential.at(ps.station_id), ps.arrival_s);
        return detail::IngestAck{r.status, r.error + " " + r.detail};
      },
      [&](const std::string& id) { return core.store().reading_count(id); },
      [&] { return core.query_alerts(0, std::numeric_limits<std::int64_t>::max()); });
}

// Live-transport run against an already-running service. Payload bytes and
// arrival times are identical to the in-process driver; only the transport
// differs, so both modes land the same bytes in the same order.
inline SimReport run_simulation_http(const SimConfig& cfg, const std::string& base_url) {
  detail::require_valid(cfg, SimMode::OverHttp);
  std::map<std::string, std::unique_ptr<TelemetryClient>> clients;
  for (const auto& st : cfg.stations)
    clients.emplace(st.config.station_id,
                    std::make_unique<TelemetryClient>(base_url, st.config.api_credential));
  TelemetryClient reader(base_url);

  return detail::run_pipeline(
      cfg,
      [&](const PlannedSend& ps) {
        const auto r = clients.at(ps.station_id)->post_telemetry(ps.wire, ps.arrival_s);
        if (!r.transport_ok)
          throw IoFailure("telemetry POST failed: " + r.body);
        return detail::IngestAck{r.status, r.body};
      },
      [&](const std::string& id) -> std::uint64_t {
        for (const auto& s : reader.fetch_stations())
          if (s.at("station_id").get<std::string>() == id)
            return s.at("readings").get<std::uint64_t>();
        return 0;
      },
      [&] { return reader.fetch_alerts(0, std::numeric_limits<std::int64_t>::max()); });
}

// ---------------------------------------------------------------------------
// JSON wiring.

inline void to_json(nlohmann::json& j, const LinkModel& l) {
  j = {{"loss_prob", l.loss_prob},
       {"latency_s", l.latency_s},
       {"max_retries", l.max_retries},
       {"retry_backoff_s", l.retry_backoff_s},
       {"seed", l.seed}};
}

inline void from_json(const nlohmann::json& j, LinkModel& l) {
  l.loss_prob = j.value("loss_prob", l.loss_prob);
  l.latency_s = j.value("latency_s", l.latency_s);
  l.max_retries = j.value("max_retries", l.max_retries);
  l.retry_backoff_s = j.value("retry_backoff_s", l.retry_backoff_s);
  l.seed = j.value("seed", l.seed);
}

inline std::string sim_mode_name(SimMode m) {
  return m == SimMode::InProcess ? "in_process" : "over_http";
}

inline SimMode sim_mode_from_name(const std::string& name) {
  if (name == "in_process") return SimMode::InProcess;
  if (name == "over_http") return SimMode::OverHttp;
  throw InvalidConfig("unknown mode: " + name + " (expected in_process or over_http)");
}

inline void to_json(nlohmann::json& j, const SimStation& s) {
  j = {{"config", s.config}, {"scenario", s.scenario}};
}

inline void from_json(const nlohmann::json& j, SimStation& s) {
  if (j.contains("config")) from_json(j.at("config"), s.config);
  if (j.contains("scenario")) from_json(j.at("scenario"), s.scenario);
}

inline void to_json(nlohmann::json& j, const SimConfig& c) {
  j = {{"duration_s", c.duration_s},
       {"mode", sim_mode_name(c.mode)},
       {"link", c.link},
       {"service", c.service},
       {"stations", c.stations}};
}

inline void from_json(const nlohmann::json& j, SimConfig& c) {
  c.duration_s = j.value("duration_s", c.duration_s);
  if (j.contains("mode")) c.mode = sim_mode_from_name(j.at("mode").get<std::string>());
  if (j.contains("link")) from_json(j.at("link"), c.link);
  if (j.contains("service")) from_json(j.at("service"), c.service);
  if (j.contains("stations")) {
    c.stations.clear();
    for (const auto& e : j.at("stations")) {
      SimStation st;
      from_json(e, st);
      c.stations.push_back(std::move(st));
    }
  }
}

}  // namespace gasnet
