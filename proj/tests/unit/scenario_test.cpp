#include <gtest/gtest.h>

#include <fstream>

#include "fixtures.hpp"
#include "zkwf/scenario.hpp"

using namespace zkwf;
using namespace zkwf::testing;

namespace {

std::string diamond_script(const std::string& extraSteps) {
  return "model: diamond.bpmn\n"
         "groupKeySeed: unit\n"
         "deployer: alice\n"
         "participants:\n"
         "  alice: {seed: alice}\n"
         "  bob: {seed: bob}\n"
         "steps:\n"
         "  - {as: alice, start: s}\n"
         "  - {as: alice, complete: s}\n" +
         extraSteps;
}

ScenarioScript parse(const std::string& yaml) { return parse_scenario(yaml, ZKWF_MODELS_DIR); }

}  // namespace

TEST(Scenario, BundledLeasingScriptPasses) {
  auto script = load_scenario(scenario_path("leasing"));
  EXPECT_GE(script.steps.size(), 50u);
  EXPECT_EQ(script.participants.size(), 5u);
  auto report = run_scenario(script);
  for (const auto& s : report.steps) EXPECT_TRUE(s.matches()) << "step " << s.index << ": " << s.detail;
  EXPECT_EQ(report.mismatches, 0u);
  EXPECT_LT(report.seconds, 10.0);
}

TEST(Scenario, BundledDiamondScriptPasses) {
  auto report = run_scenario(load_scenario(scenario_path("diamond")));
  EXPECT_EQ(report.mismatches, 0u);
  EXPECT_EQ(report.steps.size(), 10u);
}

TEST(Scenario, VerdictsForEveryOutcome) {
  auto script = parse(diamond_script(
      "  - {as: bob, fake: true}\n"
      "  - {as: alice, complete: a, expect: accept}\n"
      "  - {as: bob, complete: b, expect: BAD_AUTH}\n"
      "  - {as: alice, complete: d, expect: PROPOSE_ERROR}\n"
      "  - {as: alice, force: {b: 2, d: 1}, expect: BAD_TRANSITION}\n"
      "  - {as: alice, force: {b: 0}, expect: BAD_TRANSITION}\n"));
  auto report = run_scenario(script);
  for (const auto& s : report.steps) EXPECT_TRUE(s.matches()) << s.index << " " << s.actual << " " << s.detail;
  EXPECT_EQ(report.mismatches, 0u);
  EXPECT_TRUE(report.steps[2].h_new.has_value());
  EXPECT_FALSE(report.steps[4].h_new.has_value());
}

TEST(Scenario, InjectedIllegalStepIsFlaggedExactly) {
  auto script = parse(diamond_script(
      "  - {as: alice, complete: a}\n"
      "  - {as: alice, complete: c}\n"
      "  - {as: bob, complete: c}\n"));
  auto report = run_scenario(script);
  ASSERT_EQ(report.steps.size(), 5u);
  EXPECT_EQ(report.mismatches, 1u);
  for (std::size_t i = 0; i < report.steps.size(); ++i) EXPECT_EQ(report.steps[i].matches(), i != 3) << i;
  EXPECT_EQ(report.steps[3].actual, "BAD_AUTH");
  EXPECT_EQ(report.steps[3].line, 11);
  auto j = report.to_json();
  EXPECT_EQ(j.at("mismatches"), 1);
}

TEST(Scenario, MalformedScripts) {
  EXPECT_THROW(parse(diamond_script("  - {as: mallory, fake: true}\n")), ScenarioError);
  EXPECT_THROW(parse(diamond_script("  - {as: alice, start: s, complete: a}\n")), ScenarioError);
  EXPECT_THROW(parse(diamond_script("  - {as: alice}\n")), ScenarioError);
  EXPECT_THROW(parse(diamond_script("  - {as: alice, fake: true, expect: MAYBE}\n")), ScenarioError);
  EXPECT_THROW(parse("model: diamond.bpmn\nsteps: []\n"), ScenarioError);
  EXPECT_THROW(parse("steps: [\n"), ScenarioError);
}

TEST(Scenario, GroupKeyFromSeed) {
  EXPECT_EQ(group_key_from_seed("x").data, sha256(as_bytes("zkwf-group-key:x")).data);
  auto s = parse(diamond_script(""));
  EXPECT_EQ(s.groupKey, group_key_from_seed("unit"));
  EXPECT_EQ(s.key_of("bob").pk, KeyPair::from_seed("bob").pk);
  EXPECT_EQ(s.position_of("bob"), 1u);
}
