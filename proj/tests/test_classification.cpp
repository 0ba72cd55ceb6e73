#include <catch2/catch_amalgamated.hpp>

#include <string>

#include <json.hpp>

#include "gasnet/classification.hpp"

using namespace gasnet;

TEST_CASE("published band assignments, boundaries inclusive on the low side") {
  const ThresholdTable t;

  struct Row {
    GasSpecies g;
    double ppm;
    HazardLevel want;
  };
  const Row rows[] = {
      {GasSpecies::LPG, 0.0, HazardLevel::Normal},
      {GasSpecies::LPG, 400.0, HazardLevel::Normal},
      {GasSpecies::LPG, 400.01, HazardLevel::Elevated},
      {GasSpecies::LPG, 800.0, HazardLevel::Elevated},
      {GasSpecies::LPG, 800.01, HazardLevel::Critical},
      {GasSpecies::LPG, 1000.0, HazardLevel::Critical},
      {GasSpecies::CO, 0.0, HazardLevel::Normal},
      {GasSpecies::CO, 50.0, HazardLevel::Normal},
      {GasSpecies::CO, 51.0, HazardLevel::Elevated},
      {GasSpecies::CO, 800.0, HazardLevel::Elevated},
      {GasSpecies::CO, 801.0, HazardLevel::Critical},
  };
  for (const auto& r : rows) {
    CAPTURE(species_name(r.g), r.ppm);
    CHECK(classify(t, r.g, r.ppm) == r.want);
  }

  // Every integer ppm lands in the band the tables publish.
  for (int p = 0; p <= 1000; ++p) {
    const HazardLevel lpg = classify(t, GasSpecies::LPG, p);
    const HazardLevel co = classify(t, GasSpecies::CO, p);
    REQUIRE(lpg == (p <= 400 ? HazardLevel::Normal
                             : (p <= 800 ? HazardLevel::Elevated : HazardLevel::Critical)));
    REQUIRE(co == (p <= 50 ? HazardLevel::Normal
                           : (p <= 800 ? HazardLevel::Elevated : HazardLevel::Critical)));
  }
}

TEST_CASE("level names are species specific") {
  CHECK(std::string(level_name(GasSpecies::LPG, HazardLevel::Normal)) == "NORMAL");
  CHECK(std::string(level_name(GasSpecies::LPG, HazardLevel::Elevated)) == "HAZARDOUS");
  CHECK(std::string(level_name(GasSpecies::LPG, HazardLevel::Critical)) == "EXPLOSIVE");
  CHECK(std::string(level_name(GasSpecies::CO, HazardLevel::Normal)) == "NORMAL");
  CHECK(std::string(level_name(GasSpecies::CO, HazardLevel::Elevated)) == "DANGEROUS");
  CHECK(std::string(level_name(GasSpecies::CO, HazardLevel::Critical)) == "DEADLY");

  CHECK(is_level_name(GasSpecies::LPG, "HAZARDOUS"));
  CHECK_FALSE(is_level_name(GasSpecies::LPG, "DANGEROUS"));
  CHECK(is_level_name(GasSpecies::CO, "DEADLY"));
  CHECK_FALSE(is_level_name(GasSpecies::CO, "EXPLOSIVE"));
  CHECK_FALSE(is_level_name(GasSpecies::CO, "normal"));
  CHECK_FALSE(is_level_name(GasSpecies::CO, ""));
}

TEST_CASE("alarm trigger is the union of the per-species normal bands") {
  const ThresholdTable t;
  CHECK_FALSE(above_threshold(t, 400.0, 50.0));
  CHECK(above_threshold(t, 400.01, 0.0));
  CHECK(above_threshold(t, 0.0, 50.01));
  CHECK(above_threshold(t, 900.0, 900.0));
  CHECK_FALSE(above_normal(t, GasSpecies::LPG, 400.0));
  CHECK(above_normal(t, GasSpecies::CO, 51.0));
}

TEST_CASE("threshold overrides overlay onto the defaults") {
  const nlohmann::json j = nlohmann::json::parse(R"({"co":{"normal_max":35}})");
  ThresholdTable t;
  from_json(j, t);
  CHECK(t.co.normal_max == 35.0);
  CHECK(t.co.elevated_max == 800.0);
  CHECK(t.lpg.normal_max == 400.0);

  nlohmann::json out;
  to_json(out, t);
  CHECK(out["co"]["normal_max"] == 35.0);
  CHECK(out["lpg"]["elevated_max"] == 800.0);

  ThresholdTable back;
  from_json(out, back);
  CHECK(back.co.normal_max == 35.0);
}

TEST_CASE("threshold validation") {
  ThresholdTable t;
  CHECK(validate(t).empty());
  t.lpg.normal_max = 900.0;  // >= elevated_max
  t.co.normal_max = 0.0;
  const auto v = validate(t);
  REQUIRE(v.size() == 2);
  CHECK(v[0].find("thresholds.lpg") != std::string::npos);
  CHECK(v[1].find("thresholds.co") != std::string::npos);
}
