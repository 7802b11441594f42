#pragma once

// YAML scenario scripts: a model, participant identities and an ordered list
// of steps with expected verdicts.
//
//   model: ../models/diamond.bpmn       # relative to the script
//   groupKeySeed: demo                  # or groupKey: <64 hex>
//   deployer: alice
//   participants:
//     alice: {seed: alice}              # or {keyFile: path}
//   steps:
//     - {as: alice, start: s}
//     - {as: alice, complete: a, set: {x: 11}, message: "text", branch: b}
//     - {as: bob, fake: true}
//     - {as: bob, force: {b: 2}, expect: BAD_TRANSITION}
//
// Verdicts: accept, PROPOSE_ERROR, HASH_MISMATCH, BAD_TRANSITION, BAD_AUTH,
// BAD_SIG, LEDGER_REJECT.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zkwf/participant.hpp"

namespace zkwf {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioStep {
  std::string as;
  StepAction action;
  /// Element states written directly over the synced state, bypassing
  /// proposal construction. Used to inject illegal transitions.
  std::map<std::string, int> force;
  std::string expect = "accept";
  int line = 0;
};

struct ScenarioScript {
  std::filesystem::path modelPath;
  SymmetricKey groupKey;
  std::vector<std::pair<std::string, KeyPair>> participants;  // script order
  std::string deployer;
  std::vector<ScenarioStep> steps;

  const KeyPair& key_of(const std::string& alias) const;
  std::size_t position_of(const std::string& alias) const;
};

/// Group key derived from a seed: SHA-256("zkwf-group-key:" || seed).
SymmetricKey group_key_from_seed(std::string_view seed);

ScenarioScript load_scenario(const std::filesystem::path& path);
ScenarioScript parse_scenario(const std::string& yaml, const std::filesystem::path& baseDir);

struct StepVerdict {
  std::size_t index = 0;
  int line = 0;
  std::string as;
  std::string action;
  std::string expected;
  std::string actual;
  std::string detail;
  std::optional<std::string> h_new;

  bool matches() const { return expected == actual; }
};

struct ScenarioReport {
  std::string instanceId;
  std::vector<StepVerdict> steps;
  std::size_t mismatches = 0;
  double seconds = 0;

  nlohmann::json to_json() const;
};

struct ScenarioOptions {
  bool virtualTime = true;
  std::int64_t stepMs = 1000;  // virtual time between steps
  LedgerApi* ledger = nullptr;  // defaults to a fresh in-process ledger
};

/// Runs one step for `engine`, returning the verdict string.
StepVerdict execute_step(ParticipantEngine& engine, const std::string& instanceId, const ScenarioStep& step);

ScenarioReport run_scenario(const ScenarioScript& script, const ScenarioOptions& options = {});

}  // namespace zkwf
