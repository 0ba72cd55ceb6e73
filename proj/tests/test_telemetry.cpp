#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <string>

#include <json.hpp>

#include "gasnet/prng.hpp"
#include "gasnet/telemetry.hpp"

using namespace gasnet;

static TelemetryPayload sample_payload() {
  TelemetryPayload p;
  p.station_id = "st-01";
  p.ts = 600;
  p.seq = 1;
  p.lpg_ppm = 12.3;
  p.co_ppm = 4.0;
  p.temp_c = 28.5;
  p.lpg_level = "NORMAL";
  p.co_level = "NORMAL";
  p.alarm = false;
  p.fw = "1.0.0";
  return p;
}

TEST_CASE("canonical wire bytes are frozen") {
  CHECK(to_wire(sample_payload()) ==
        "{\"station_id\":\"st-01\",\"ts\":600,\"seq\":1,\"lpg_ppm\":12.3,"
        "\"co_ppm\":4.0,\"temp_c\":28.5,\"lpg_level\":\"NORMAL\",\"co_level\":"
        "\"NORMAL\",\"alarm\":false,\"fw\":\"1.0.0\"}");

  TelemetryPayload p = sample_payload();
  p.temp_c.reset();
  p.alarm = true;
  p.lpg_level = "HAZARDOUS";
  p.lpg_ppm = 512.0;
  CHECK(to_wire(p) ==
        "{\"station_id\":\"st-01\",\"ts\":600,\"seq\":1,\"lpg_ppm\":512.0,"
        "\"co_ppm\":4.0,\"temp_c\":null,\"lpg_level\":\"HAZARDOUS\",\"co_level\":"
        "\"NORMAL\",\"alarm\":true,\"fw\":\"1.0.0\"}");
}

TEST_CASE("wire bytes parse back to the identical payload") {
  const TelemetryPayload p = sample_payload();
  CHECK(parse_payload(to_wire(p)) == p);

  TelemetryPayload no_temp = p;
  no_temp.temp_c.reset();
  CHECK(parse_payload(to_wire(no_temp)) == no_temp);
}

TEST_CASE("randomized payloads roundtrip exactly") {
  SplitMix64 rng(0x7e1e);
  const char* lpg_levels[] = {"NORMAL", "HAZARDOUS", "EXPLOSIVE"};
  const char* co_levels[] = {"NORMAL", "DANGEROUS", "DEADLY"};
  for (int i = 0; i < 1000; ++i) {
    TelemetryPayload p;
    p.station_id = "st-" + std::to_string(rng.next() % 1000);
    p.ts = static_cast<std::int64_t>(rng.next() % 2000000);
    p.seq = rng.next() % 100000;
    p.lpg_ppm = quantize_1dp(rng.next_unit() * 1000.0);
    p.co_ppm = quantize_1dp(rng.next_unit() * 1000.0);
    if (rng.next() % 4 != 0)
      p.temp_c = quantize_1dp(kTempMinC + rng.next_unit() * (kTempMaxC - kTempMinC));
    p.lpg_level = lpg_levels[rng.next() % 3];
    p.co_level = co_levels[rng.next() % 3];
    p.alarm = (rng.next() % 2) == 1;
    p.fw = std::to_string(rng.next() % 10) + "." + std::to_string(rng.next() % 10) +
           "." + std::to_string(rng.next() % 10);
    const std::string wire = to_wire(p);
    CAPTURE(wire);
    REQUIRE(parse_payload(wire) == p);
    // Canonical form is a fixed point.
    REQUIRE(to_wire(parse_payload(wire)) == wire);
  }
}

TEST_CASE("parser accepts reordered keys and ignores unknown ones") {
  const TelemetryPayload p = parse_payload(
      R"({"fw":"1.0.0","alarm":false,"co_level":"NORMAL","lpg_level":"NORMAL",
          "temp_c":null,"co_ppm":4.0,"lpg_ppm":12.3,"seq":1,"ts":600,
          "station_id":"st-01","rssi":-71})");
  TelemetryPayload want = sample_payload();
  want.temp_c.reset();
  CHECK(p == want);
}

TEST_CASE("parser rejects structural and type errors") {
  const std::string good = to_wire(sample_payload());
  CHECK_THROWS_AS(parse_payload("not json"), ParseError);
  CHECK_THROWS_AS(parse_payload("[1,2,3]"), ParseError);
  CHECK_THROWS_AS(parse_payload("42"), ParseError);
  CHECK_THROWS_AS(parse_payload(""), ParseError);

  nlohmann::json j = nlohmann::json::parse(good);
  for (const char* key : {"station_id", "ts", "seq", "lpg_ppm", "co_ppm", "temp_c",
                          "lpg_level", "co_level", "alarm", "fw"}) {
    nlohmann::json m = j;
    m.erase(key);
    CAPTURE(key);
    CHECK_THROWS_AS(payload_from_json(m), ParseError);
  }

  auto mutated = [&](const char* key, nlohmann::json v) {
    nlohmann::json m = j;
    m[key] = std::move(v);
    return m;
  };
  CHECK_THROWS_AS(payload_from_json(mutated("station_id", 5)), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("ts", "600")), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("ts", 600.5)), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("seq", -1)), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("lpg_ppm", "12.3")), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("temp_c", "hot")), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("alarm", 1)), ParseError);
  CHECK_THROWS_AS(payload_from_json(mutated("fw", nullptr)), ParseError);

  // Integral floats are integers as far as JSON is concerned.
  CHECK_NOTHROW(payload_from_json(mutated("lpg_ppm", 12)));
}

TEST_CASE("station id charset") {
  CHECK(valid_station_id("st-01"));
  CHECK(valid_station_id("A.b_C-9"));
  CHECK(valid_station_id("x"));
  CHECK(valid_station_id(std::string(64, 'a')));
  CHECK_FALSE(valid_station_id(""));
  CHECK_FALSE(valid_station_id(std::string(65, 'a')));
  CHECK_FALSE(valid_station_id("."));
  CHECK_FALSE(valid_station_id(".."));
  CHECK(valid_station_id("..."));
  CHECK_FALSE(valid_station_id("st 01"));
  CHECK_FALSE(valid_station_id("st/01"));
  CHECK_FALSE(valid_station_id("st\\01"));
  CHECK_FALSE(valid_station_id("st\n01"));
  CHECK_FALSE(valid_station_id("caf\xc3\xa9"));
}

TEST_CASE("one-decimal quantization and rendering") {
  CHECK(quantize_1dp(12.34) == 12.3);
  CHECK(quantize_1dp(12.35) == 12.4);
  CHECK(quantize_1dp(-0.04) == -0.0);
  CHECK(quantize_1dp(0.0) == 0.0);
  CHECK(format_1dp(4.0) == "4.0");
  CHECK(format_1dp(12.25) == "12.2");  // printf rounds the binary value
  CHECK(format_1dp(1000.0) == "1000.0");
  CHECK(format_1dp(quantize_1dp(999.96)) == "1000.0");
}

TEST_CASE("string escaping covers control and quote characters") {
  std::string out;
  json_append_escaped(out, "a\"b\\c\nd\te\rf\x01g");
  CHECK(out == "\"a\\\"b\\\\c\\nd\\te\\rf\\u0001g\"");

  TelemetryPayload p = sample_payload();
  p.fw = "1.0\"x";
  const std::string wire = to_wire(p);
  CHECK(parse_payload(wire).fw == "1.0\"x");
}
