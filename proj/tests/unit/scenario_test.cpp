#include <string>

#include <gtest/gtest.h>

#include "grfswarm/scenario.hpp"

using namespace grfswarm;

namespace {

const std::string kDir = GRFSWARM_SCENARIO_DIR;

const char *kMinimal = R"({
  "species": [{"name": "H", "mass": 1, "charge": 1, "total_cap": 1, "pair_caps": {"H": 1}}],
  "population": {"H": 4}
})";

std::string error_of(const std::string &text) {
  try {
    load_scenario(text);
  } catch (const ScenarioError &e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST(Scenario, PresetsLoadWithReferencePopulations) {
  struct Case {
    const char *file;
    int robots;
  } cases[] = {{"water.json", 180}, {"methane.json", 180}, {"polyamines.json", 180},
               {"oxocarbon.json", 180}, {"bridge.json", 20}};
  for (const auto &c : cases) {
    SCOPED_TRACE(c.file);
    auto s = load_scenario_file(kDir + "/" + c.file);
    EXPECT_EQ(s.robot_count(), c.robots);
    EXPECT_TRUE(validate_scenario(s).empty());
  }
}

TEST(Scenario, WaterPresetTranscribesCapsAndCharges) {
  auto s = load_scenario_file(kDir + "/water.json");
  const auto h = s.species_index("H"), o = s.species_index("O");
  ASSERT_LT(h, s.species.size());
  ASSERT_LT(o, s.species.size());
  EXPECT_EQ(s.species[h].mass, 1.0);
  EXPECT_EQ(s.species[h].charge, 1.0);
  EXPECT_EQ(s.species[o].mass, 16.0);
  EXPECT_EQ(s.species[o].charge, 2.0);
  EXPECT_EQ(s.species[h].pair_cap(o), 1);
  EXPECT_EQ(s.species[h].pair_cap(h), 1);
  EXPECT_EQ(s.species[o].pair_cap(o), 0);
  EXPECT_EQ(s.species[o].pair_cap(h), 2);
  EXPECT_EQ(s.species[h].total_cap, 1);
  EXPECT_EQ(s.species[o].total_cap, 2);
  EXPECT_EQ(s.population[h], 120);
  EXPECT_EQ(s.population[o], 60);
  EXPECT_EQ(s.world_width, 10.0);
  EXPECT_EQ(s.sensing_radius, 0.5);
  EXPECT_EQ(s.v_max, 1.0);
}

TEST(Scenario, DefaultsFollowDocumentedValues) {
  auto s = load_scenario(kMinimal);
  EXPECT_EQ(s.world_width, 10.0);
  EXPECT_EQ(s.dt, 0.1);
  EXPECT_EQ(s.ticks, 20000);
  EXPECT_EQ(s.sampler.iterations, 100);
  EXPECT_EQ(s.sampler.burn_in, 50);
  EXPECT_DOUBLE_EQ(s.sampler.proposal_sigma, 1.0 / 3.0);
  EXPECT_EQ(s.sampler.proposal_mode, ProposalMode::independent);
  EXPECT_EQ(s.potential.epsilon, 1.0);
  EXPECT_EQ(s.potential.r0, 0.25);
  EXPECT_EQ(s.potential.alpha, 12.0);
  EXPECT_EQ(s.potential.coulomb_constant, 0.5);
  EXPECT_DOUBLE_EQ(s.potential.r_min_clamp, 0.3 * 0.25);
  EXPECT_EQ(s.potential.wall_charge, 2.0);
  EXPECT_EQ(s.potential.kinetic_mode, KineticMode::relative);
  EXPECT_DOUBLE_EQ(s.bond_distance_threshold(), 1.5 * 0.25);
  EXPECT_EQ(s.metrics_stride, 10);
}

TEST(Scenario, SamplerDefaultsScaleWithIterationsAndSpeed) {
  auto s = load_scenario(R"({
    "v_max": 0.6,
    "species": [{"name": "H", "mass": 1, "charge": 1, "total_cap": 1, "pair_caps": {}}],
    "population": {"H": 2},
    "sampler": {"iterations": 40}
  })");
  EXPECT_EQ(s.sampler.burn_in, 20);
  EXPECT_DOUBLE_EQ(s.sampler.proposal_sigma, 0.2);
  EXPECT_EQ(s.species[0].pair_cap(0), 0);
}

TEST(Scenario, RoundTripThroughJsonIsLossless) {
  for (const char *f : {"water.json", "methane.json", "polyamines.json", "oxocarbon.json", "bridge.json"}) {
    SCOPED_TRACE(f);
    auto s = load_scenario_file(kDir + "/" + f);
    auto again = load_scenario(scenario_to_json(s).dump());
    EXPECT_EQ(s, again);
  }
}

TEST(Scenario, EmptyPopulationRejected) {
  EXPECT_NE(error_of(R"({"species": [{"name": "H", "mass": 1, "charge": 1, "total_cap": 1}],
                         "population": {"H": 0}})")
                .find("empty population"),
            std::string::npos);
}

TEST(Scenario, AnchorOutsideWorldRejected) {
  auto msg = error_of(R"({"world": {"width": 4, "height": 4},
    "species": [{"name": "C", "mass": 12, "charge": 4, "total_cap": 2}],
    "population": {"C": 1}, "anchors": [{"species": "C", "x": 5, "y": 1}]})");
  EXPECT_NE(msg.find("anchor 0 outside bounds"), std::string::npos) << msg;
}

TEST(Scenario, EveryViolationIsReported) {
  auto msg = error_of(R"({"dt": -1, "v_max": -2,
    "species": [{"name": "H", "mass": 0, "charge": 1, "total_cap": 1}],
    "population": {"H": 3}, "potential": {"alpha": 5}})");
  for (const char *part : {"dt must be > 0", "v_max must be >= 0", "species H: mass must be > 0",
                           "potential.alpha must be > 6"})
    EXPECT_NE(msg.find(part), std::string::npos) << part << " missing from: " << msg;
}

TEST(Scenario, ErrorsNameTheField) {
  EXPECT_NE(error_of(R"({"species": [{"name": "H", "mass": "heavy", "charge": 1, "total_cap": 1}],
                         "population": {"H": 1}})")
                .find("species[0].mass: wrong type"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"species": [{"name": "H", "charge": 1, "total_cap": 1}], "population": {"H": 1}})")
                .find("species[0].mass: missing required field"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"species": [{"name": "H", "mass": 1, "charge": 1, "total_cap": 1}],
                         "population": {"X": 1}})")
                .find("population: unknown species 'X'"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"species": [{"name": "H", "mass": 1, "charge": 1, "total_cap": 1,
                         "pair_caps": {"Q": 1}}], "population": {"H": 1}})")
                .find("unknown species"),
            std::string::npos);
}

TEST(Scenario, ParseErrorsCarryPosition) {
  auto msg = error_of("{\"species\": [\n  {\"name\": }\n]}");
  EXPECT_EQ(msg.rfind("parse error:", 0), 0u) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Scenario, MissingFileSaysFileNotFound) {
  try {
    load_scenario_file(kDir + "/no_such_file.json");
    FAIL() << "expected ScenarioError";
  } catch (const ScenarioError &e) {
    EXPECT_NE(std::string(e.what()).find("file not found"), std::string::npos);
  }
}

TEST(Scenario, ParseWithoutValidationKeepsInvalidValues) {
  auto s = parse_scenario(R"({"dt": 0, "species": [{"name": "H", "mass": 1, "charge": 1, "total_cap": 1}],
                              "population": {"H": 1}})");
  EXPECT_EQ(s.dt, 0.0);
  ASSERT_EQ(validate_scenario(s).size(), 1u);
  EXPECT_EQ(validate_scenario(s)[0], "dt must be > 0");
}
