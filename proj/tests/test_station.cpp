#include <catch2/catch_amalgamated.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "gasnet/station.hpp"

using namespace gasnet;

namespace {

StationConfig test_config() {
  StationConfig c;
  c.station_id = "st-01";
  c.api_credential = "local-dev-telemetry-token";
  return c;
}

template <class T>
bool has_action(const std::vector<StationAction>& as) {
  for (const auto& a : as)
    if (std::holds_alternative<T>(a)) return true;
  return false;
}

const TelemetryPayload* sent_payload(const std::vector<StationAction>& as) {
  for (const auto& a : as)
    if (const auto* s = std::get_if<Send>(&a)) return &s->payload;
  return nullptr;
}

int lpg_counts(const StationConfig& c, double ppm) {
  return ppm_to_adc_saturating(c.lpg_curve, ppm);
}
int co_counts(const StationConfig& c, double ppm) {
  return ppm_to_adc_saturating(c.co_curve, ppm);
}

}  // namespace

TEST_CASE("boot produces a banner and a quiet initial state") {
  const StationState st = boot(test_config());
  CHECK(st.booted);
  CHECK(st.seq == 0);
  CHECK_FALSE(st.buzzer_on);
  CHECK_FALSE(st.last_report_s.has_value());
  REQUIRE(st.display_lines.size() == 4);
  CHECK(st.display_lines[0] == "GAS MONITOR");
  CHECK(st.display_lines[1] == "st-01");
  CHECK(st.display_lines[2] == "fw 1.0.0");
  CHECK(st.display_lines[3] == "WAIT");
}

TEST_CASE("boot rejects bad configs and names the offending fields") {
  StationConfig c = test_config();
  c.station_id = "bad id!";
  c.sample_period_s = 0;
  try {
    boot(c);
    FAIL("expected InvalidConfig");
  } catch (const InvalidConfig& e) {
    const std::string msg = e.what();
    CHECK(msg.find("station_id") != std::string::npos);
    CHECK(msg.find("sample_period_s") != std::string::npos);
  }

  StationConfig order = test_config();
  order.alarm_report_period_s = 900;  // above report_period_s
  const auto v = validate(order);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("alarm_report_period_s <= report_period_s") != std::string::npos);

  StationConfig curve = test_config();
  curve.co_curve.b_exp = 1.0;
  const auto cv = validate(curve);
  REQUIRE(cv.size() == 1);
  CHECK(cv[0].rfind("curves.co:", 0) == 0);
}

TEST_CASE("unbooted state and non-advancing clocks are rejected") {
  StationState st;
  CHECK_THROWS_AS(step(st, 0, 512, 512, std::nullopt), NotBooted);
  CHECK_THROWS_AS(should_report(st, 0, false), NotBooted);

  StationState ok = boot(test_config());
  step(ok, 10, 512, 512, std::nullopt);
  CHECK_THROWS_AS(step(ok, 10, 512, 512, std::nullopt), std::logic_error);
  CHECK_THROWS_AS(step(ok, 8, 512, 512, std::nullopt), std::logic_error);
  CHECK_NOTHROW(step(ok, 11, 512, 512, std::nullopt));
}

TEST_CASE("first step after boot always reports") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  const auto actions = step(st, 162, lpg_counts(c, 10), co_counts(c, 5), 25.0);
  const TelemetryPayload* p = sent_payload(actions);
  REQUIRE(p != nullptr);
  CHECK(p->seq == 0);
  CHECK(p->ts == 162);
  CHECK(p->station_id == "st-01");
  CHECK(p->alarm == false);
  CHECK(p->lpg_level == "NORMAL");
  CHECK(p->co_level == "NORMAL");
  REQUIRE(p->temp_c.has_value());
  CHECK(*p->temp_c == 25.0);
  CHECK(st.seq == 1);
  CHECK(st.last_report_s == 162);
  CHECK(has_action<Display>(actions));
  CHECK_FALSE(has_action<BuzzerOn>(actions));
}

TEST_CASE("quiet stations report exactly on the reporting period") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  std::vector<std::int64_t> send_times;
  for (std::int64_t t = 0; t < 3600; t += c.sample_period_s) {
    const auto actions = step(st, t, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);
    if (sent_payload(actions)) send_times.push_back(t);
  }
  CHECK(send_times == std::vector<std::int64_t>{0, 600, 1200, 1800, 2400, 3000});
  CHECK(st.seq == 6);
}

TEST_CASE("rising edge sounds the buzzer and reports in the same step") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  step(st, 0, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);
  step(st, 2, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);

  const auto actions = step(st, 4, lpg_counts(c, 500), co_counts(c, 5), std::nullopt);
  CHECK(has_action<BuzzerOn>(actions));
  const TelemetryPayload* p = sent_payload(actions);
  REQUIRE(p != nullptr);
  CHECK(p->alarm);
  CHECK(p->lpg_level == "HAZARDOUS");
  CHECK(p->co_level == "NORMAL");
  CHECK(p->seq == 1);
  CHECK(st.buzzer_on);

  SECTION("CO alone also trips the alarm") {
    StationState co_st = boot(c);
    const auto a = step(co_st, 0, lpg_counts(c, 10), co_counts(c, 100), std::nullopt);
    CHECK(has_action<BuzzerOn>(a));
    const TelemetryPayload* cp = sent_payload(a);
    REQUIRE(cp != nullptr);
    CHECK(cp->co_level == "DANGEROUS");
    CHECK(cp->alarm);
  }
}

TEST_CASE("alarm reports are throttled to the alarm period while above") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  step(st, 0, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);

  std::vector<std::int64_t> send_times;
  for (std::int64_t t = 2; t <= 400; t += c.sample_period_s) {
    const auto actions = step(st, t, lpg_counts(c, 600), co_counts(c, 5), std::nullopt);
    if (sent_payload(actions)) send_times.push_back(t);
  }
  // Rising edge at t=2, then one report per alarm_report_period_s, not per
  // sample and not per report period.
  CHECK(send_times == std::vector<std::int64_t>{2, 62, 122, 182, 242, 302, 362});
}

TEST_CASE("falling edge silences the buzzer and the clear rides the next periodic report") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  step(st, 0, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);
  step(st, 2, lpg_counts(c, 600), co_counts(c, 5), std::nullopt);  // edge, reports
  REQUIRE(st.buzzer_on);
  REQUIRE(st.last_report_s == 2);

  const auto down = step(st, 4, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);
  CHECK(has_action<BuzzerOff>(down));
  CHECK_FALSE(st.buzzer_on);
  CHECK(sent_payload(down) == nullptr);  // back-to-normal is not an urgent event

  std::int64_t next_send = -1;
  for (std::int64_t t = 6; t <= 700; t += c.sample_period_s) {
    const auto a = step(st, t, lpg_counts(c, 10), co_counts(c, 5), std::nullopt);
    if (const auto* p = sent_payload(a)) {
      next_send = t;
      CHECK_FALSE(p->alarm);
      CHECK(p->lpg_level == "NORMAL");
      break;
    }
  }
  CHECK(next_send == 602);  // 600 s after the alarm report at t=2
}

TEST_CASE("buzzer state always mirrors the threshold comparison") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  SplitMix64 rng(5150);
  std::uint64_t sends = 0;
  for (std::int64_t t = 0; t < 4000; t += 2) {
    const double lpg = rng.next_unit() * 1000.0;
    const double co = rng.next_unit() * 100.0;
    const int al = lpg_counts(c, lpg);
    const int ac = co_counts(c, co);
    const auto actions = step(st, t, al, ac, std::nullopt);
    const bool above = above_threshold(c.thresholds, adc_to_ppm(c.lpg_curve, al),
                                       adc_to_ppm(c.co_curve, ac));
    REQUIRE(st.buzzer_on == above);
    if (const auto* p = sent_payload(actions)) {
      REQUIRE(p->alarm == above);
      ++sends;
    }
  }
  CHECK(st.seq == sends);  // seq counts exactly the emitted payloads
}

TEST_CASE("display fits a 21x4 panel for the full measurement range") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  std::int64_t t = 0;
  for (int ppm = 1; ppm <= 1000; ppm += 7) {
    const auto actions =
        step(st, ++t, lpg_counts(c, ppm), co_counts(c, ppm), 28.5);
    REQUIRE(has_action<Display>(actions));
    REQUIRE(st.display_lines.size() <= kDisplayRows);
    for (const auto& line : st.display_lines) {
      CAPTURE(ppm, line);
      REQUIRE(line.size() <= kDisplayCols);
    }
  }

  SECTION("content of a quiet frame") {
    StationState fresh = boot(c);
    step(fresh, 1, ppm_to_adc(c.lpg_curve, 12.3), ppm_to_adc(c.co_curve, 4.0), 28.5);
    REQUIRE(fresh.display_lines.size() == 4);
    // The ADC roundtrip of 12.3 ppm lands at 12.36, one decimal 12.4.
    CHECK(fresh.display_lines[0] == "LPG 12.4 NORMAL");
    CHECK(fresh.display_lines[1] == "CO 4.0 NORMAL");
    CHECK(fresh.display_lines[2] == "TEMP 28.5 C");
    CHECK(fresh.display_lines[3] == "STATUS OK");
  }
  SECTION("alarm frame has no temperature row when none is supplied") {
    StationState fresh = boot(c);
    step(fresh, 1, lpg_counts(c, 900), co_counts(c, 5), std::nullopt);
    REQUIRE(fresh.display_lines.size() == 3);
    CHECK(fresh.display_lines[0].find("EXPLOSIVE") != std::string::npos);
    CHECK(fresh.display_lines[2] == "STATUS ALARM");
  }
}

TEST_CASE("temperature is clamped to the sensor's operating range") {
  const StationConfig c = test_config();
  StationState st = boot(c);
  const auto hot = step(st, 0, 512, 512, 200.0);
  REQUIRE(sent_payload(hot) != nullptr);
  CHECK(*sent_payload(hot)->temp_c == kTempMaxC);

  StationState st2 = boot(c);
  const auto cold = step(st2, 0, 512, 512, -100.0);
  CHECK(*sent_payload(cold)->temp_c == kTempMinC);
}

TEST_CASE("station config json roundtrip keeps the credential out of dumps") {
  StationConfig c = test_config();
  c.report_period_s = 300;
  c.include_temperature = false;
  c.thresholds.co.normal_max = 35.0;
  c.lpg_curve.adc_bits = 12;

  const nlohmann::json j = c;
  CHECK_FALSE(j.contains("api_credential"));

  StationConfig back;
  from_json(j, back);
  CHECK(back.station_id == "st-01");
  CHECK(back.report_period_s == 300);
  CHECK(back.include_temperature == false);
  CHECK(back.thresholds.co.normal_max == 35.0);
  CHECK(back.lpg_curve.adc_bits == 12);
  CHECK(back.co_curve.b_exp == c.co_curve.b_exp);
  CHECK(back.api_credential.empty());

  nlohmann::json with_cred = j;
  with_cred["api_credential"] = "local-dev-telemetry-token";
  StationConfig full;
  from_json(with_cred, full);
  CHECK(full.api_credential == "local-dev-telemetry-token");
}
