// Operator entry points.
//
//   gasnet serve    -c service.json
//   gasnet simulate -c sim.json [--http URL] [--out report.json]
//   gasnet report   --source <dir|url> --station <id> [--from N] [--to N]
//                   [--format table|csv|json] [--hourly]
//
// Exit codes are part of the contract: 0 ok, 1 invalid config, 2 bind
// failure, 3 contract violation (service rejected a payload the harness
// believes valid, or the accounting identity broke), 4 unknown station,
// 5 unreachable service. GASNET_TOKEN overrides the credential in config
// files so secrets can stay out of them.

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gasnet/http_api.hpp"
#include "gasnet/report.hpp"
#include "gasnet/service.hpp"
#include "gasnet/simnet.hpp"

namespace {

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gasnet::InvalidConfig("cannot read config file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw gasnet::InvalidConfig("config is not valid JSON: " + path + ": " + e.what());
  }
}

gasnet::HttpApi* g_api = nullptr;

void handle_signal(int) {
  if (g_api) g_api->stop();
}

int cmd_serve(const std::string& config_path) {
  gasnet::ServiceConfig cfg;
  from_json(load_json_file(config_path), cfg);
  if (const char* tok = std::getenv("GASNET_TOKEN")) cfg.token = tok;

  gasnet::ServiceCore core(cfg);
  gasnet::HttpApi api(core);
  int port = cfg.port;
  if (port == 0) {
    port = api.bind_any_port(cfg.bind_address);
    if (port <= 0) {
      std::cerr << "error: cannot bind " << cfg.bind_address << "\n";
      return 2;
    }
  } else if (!api.bind(cfg.bind_address, port)) {
    std::cerr << "error: cannot bind " << cfg.bind_address << ":" << port << "\n";
    return 2;
  }

  g_api = &api;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cout << "listening on http://" << cfg.bind_address << ":" << port << std::endl;
  api.listen_after_bind();
  core.close();
  std::cerr << "shutdown: storage flushed\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& http_url,
                 const std::string& out_path) {
  gasnet::SimConfig cfg;
  from_json(load_json_file(config_path), cfg);
  if (const char* tok = std::getenv("GASNET_TOKEN")) {
    cfg.service.token = tok;
    for (auto& st : cfg.stations) st.config.api_credential = tok;
  }

  gasnet::SimReport report;
  if (!http_url.empty()) {
    report = gasnet::run_simulation_http(cfg, http_url);
  } else if (cfg.mode == gasnet::SimMode::OverHttp) {
    throw gasnet::InvalidConfig("config selects over_http mode: pass --http URL");
  } else {
    report = gasnet::run_simulation(cfg);
  }

  const std::string bytes = gasnet::report_bytes(report);
  std::cout << bytes << std::flush;
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw gasnet::IoFailure("cannot write " + out_path);
    out << bytes;
  }
  std::fprintf(stderr, "wall_time_s=%.3f\n", report.wall_time_s);

  if (!gasnet::accounting_holds(report)) {
    std::cerr << "error: accounting identity violated "
                 "(delivered + lost != sent, or stored != delivered)\n";
    return 3;
  }
  return 0;
}

int cmd_report(const std::string& source, const std::string& station, std::int64_t from_s,
               std::int64_t to_s, const std::string& format_name, bool hourly) {
  const gasnet::report::Format format = gasnet::report::parse_format(format_name);
  std::string rendered;
  if (hourly)
    rendered = gasnet::report::render_hourly(
        gasnet::report::fetch_hourly(source, station, from_s, to_s), format);
  else
    rendered = gasnet::report::render_readings(
        gasnet::report::fetch_readings(source, station, from_s, to_s), format);
  std::cout << rendered << std::flush;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gas monitoring: service, fleet simulator, history reports"};
  app.require_subcommand(1);

  std::string serve_config;
  CLI::App* serve = app.add_subcommand("serve", "run the ingest/query service");
  serve->add_option("-c,--config", serve_config, "service config JSON")->required();

  std::string sim_config;
  std::string sim_http;
  std::string sim_out;
  CLI::App* simulate = app.add_subcommand("simulate", "run a deterministic fleet simulation");
  simulate->add_option("-c,--config", sim_config, "simulation config JSON")->required();
  simulate->add_option("--http", sim_http, "send telemetry to a live service at this URL");
  simulate->add_option("--out", sim_out, "also write the report JSON to this file");

  std::string rep_source;
  std::string rep_station;
  std::int64_t rep_from = 0;
  std::int64_t rep_to = std::numeric_limits<std::int64_t>::max();
  std::string rep_format = "table";
  bool rep_hourly = false;
  CLI::App* rep = app.add_subcommand("report", "render stored history");
  rep->add_option("--source", rep_source, "data directory or service base URL")->required();
  rep->add_option("--station", rep_station, "station id")->required();
  rep->add_option("--from", rep_from, "range start, inclusive seconds");
  rep->add_option("--to", rep_to, "range end, inclusive seconds");
  rep->add_option("--format", rep_format, "table, csv or json");
  rep->add_flag("--hourly", rep_hourly, "hourly mean trend instead of raw readings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (serve->parsed()) return cmd_serve(serve_config);
    if (simulate->parsed()) return cmd_simulate(sim_config, sim_http, sim_out);
    return cmd_report(rep_source, rep_station, rep_from, rep_to, rep_format, rep_hourly);
  } catch (const gasnet::storage::UnknownStation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const gasnet::ContractViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const gasnet::IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const gasnet::InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
