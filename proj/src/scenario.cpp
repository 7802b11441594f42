#include "zkwf/scenario.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "zkwf/schedule.hpp"

namespace zkwf {

const KeyPair& ScenarioScript::key_of(const std::string& alias) const {
  return participants.at(position_of(alias)).second;
}

std::size_t ScenarioScript::position_of(const std::string& alias) const {
  for (std::size_t i = 0; i < participants.size(); ++i) {
    if (participants[i].first == alias) return i;
  }
  throw ScenarioError("unknown participant alias '" + alias + "'");
}

SymmetricKey group_key_from_seed(std::string_view seed) {
  std::string material = "zkwf-group-key:" + std::string(seed);
  return SymmetricKey::from_span(sha256(as_bytes(material)).view());
}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

[[noreturn]] void fail_at(const YAML::Node& n, const std::string& what) {
  throw ScenarioError("line " + std::to_string(line_of(n)) + ": " + what);
}

const std::set<std::string> kVerdicts = {"accept",      "PROPOSE_ERROR", "HASH_MISMATCH", "BAD_TRANSITION",
                                         "BAD_AUTH",    "BAD_SIG",       "LEDGER_REJECT"};

ScenarioStep parse_step(const YAML::Node& n) {
  if (!n.IsMap()) fail_at(n, "step must be a mapping");
  ScenarioStep step;
  step.line = line_of(n);
  if (!n["as"]) fail_at(n, "step needs 'as'");
  step.as = n["as"].as<std::string>();
  int kinds = 0;
  if (n["start"]) {
    step.action = StepAction::start(n["start"].as<std::string>());
    ++kinds;
  }
  if (n["complete"]) {
    step.action = StepAction::complete(n["complete"].as<std::string>());
    ++kinds;
  }
  if (n["fake"]) {
    if (!n["fake"].as<bool>()) fail_at(n, "'fake' must be true");
    step.action = StepAction::fake();
    ++kinds;
  }
  if (n["force"]) {
    for (const auto& kv : n["force"]) step.force[kv.first.as<std::string>()] = kv.second.as<int>();
    ++kinds;
  }
  if (kinds != 1) fail_at(n, "step needs exactly one of start, complete, fake, force");
  if (n["set"]) {
    for (const auto& kv : n["set"]) step.action.writes[kv.first.as<std::string>()] = kv.second.as<std::int64_t>();
  }
  if (n["message"]) {
    auto text = n["message"].as<std::string>();
    step.action.message = Bytes(text.begin(), text.end());
  }
  if (n["branch"]) step.action.branch = n["branch"].as<std::string>();
  if (n["expect"]) {
    step.expect = n["expect"].as<std::string>();
    if (!kVerdicts.count(step.expect)) fail_at(n, "unknown verdict '" + step.expect + "'");
  }
  return step;
}

}  // namespace

ScenarioScript parse_scenario(const std::string& yaml, const std::filesystem::path& baseDir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("scenario is not valid YAML: ") + e.what());
  }
  if (!root.IsMap()) throw ScenarioError("scenario must be a mapping");
  ScenarioScript s;
  try {
    if (!root["model"]) throw ScenarioError("scenario needs 'model'");
    s.modelPath = baseDir / root["model"].as<std::string>();
    if (root["groupKey"]) {
      s.groupKey = SymmetricKey::from_hex(root["groupKey"].as<std::string>());
    } else {
      s.groupKey = group_key_from_seed(root["groupKeySeed"] ? root["groupKeySeed"].as<std::string>() : "zkwf");
    }
    if (!root["participants"] || !root["participants"].IsMap()) throw ScenarioError("scenario needs 'participants'");
    for (const auto& kv : root["participants"]) {
      const auto alias = kv.first.as<std::string>();
      const auto& spec = kv.second;
      if (spec["seed"]) {
        s.participants.emplace_back(alias, KeyPair::from_seed(spec["seed"].as<std::string>()));
      } else if (spec["keyFile"]) {
        s.participants.emplace_back(alias, load_key_file(baseDir / spec["keyFile"].as<std::string>()));
      } else {
        fail_at(spec, "participant '" + alias + "' needs seed or keyFile");
      }
    }
    s.deployer = root["deployer"] ? root["deployer"].as<std::string>() : s.participants.front().first;
    s.position_of(s.deployer);
    if (root["steps"]) {
      for (const auto& n : root["steps"]) {
        s.steps.push_back(parse_step(n));
        s.position_of(s.steps.back().as);
      }
    }
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }
  return s;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::filesystem::filesystem_error("cannot read scenario", path, std::make_error_code(std::errc::no_such_file_or_directory));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

StepVerdict execute_step(ParticipantEngine& engine, const std::string& instanceId, const ScenarioStep& step) {
  StepVerdict v;
  v.line = step.line;
  v.as = step.as;
  v.expected = step.expect;
  v.action = step.force.empty() ? step.action.describe() : "force";
  try {
    SyncedState cur = engine.sync(instanceId);
    ProcessState s_new;
    if (!step.force.empty()) {
      s_new = cur.state;
      for (const auto& [id, value] : step.force) {
        s_new.v.at(engine.descriptor().position_or_throw(id)) = static_cast<std::uint8_t>(value);
      }
    } else {
      s_new = engine.propose(cur.state, step.action);
    }
    UpdateTx tx = engine.build_update(cur, s_new);
    v.h_new = tx.h_new.hex();
    auto result = engine.submit(instanceId, tx);
    v.actual = result.accepted ? "accept" : "LEDGER_REJECT";
    v.detail = result.message;
  } catch (const ProposeError& e) {
    v.actual = "PROPOSE_ERROR";
    v.detail = e.what();
  } catch (const StatementRefused& e) {
    v.actual = std::string(to_string(e.reason()));
    v.detail = e.what();
  }
  return v;
}

nlohmann::json ScenarioReport::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json j{{"index", s.index},   {"line", s.line},         {"as", s.as},
                     {"action", s.action}, {"expected", s.expected}, {"actual", s.actual}};
    if (!s.detail.empty()) j["detail"] = s.detail;
    if (s.h_new) j["h_new"] = *s.h_new;
    steps_json.push_back(j);
  }
  return {{"instanceId", instanceId}, {"steps", steps_json}, {"mismatches", mismatches}, {"seconds", seconds}};
}

ScenarioReport run_scenario(const ScenarioScript& script, const ScenarioOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  auto model = load_bpmn_file(script.modelPath.string());
  auto descriptor = std::make_shared<const StatementDescriptor>(build_descriptor(model));

  VirtualClock clock;
  std::unique_ptr<Ledger> local;
  LedgerApi* ledger = options.ledger;
  if (!ledger) {
    Ledger::Options lo;
    if (options.virtualTime) lo.clock = clock.source();
    local = std::make_unique<Ledger>(lo);
    ledger = local.get();
  }

  std::vector<std::unique_ptr<ParticipantEngine>> engines;
  for (const auto& [alias, kp] : script.participants) {
    engines.push_back(std::make_unique<ParticipantEngine>(ParticipantConfig{kp, script.groupKey, descriptor}, *ledger));
  }

  ScenarioReport report;
  report.instanceId = engines[script.position_of(script.deployer)]->deploy();
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    clock.advance(options.stepMs);
    const auto& step = script.steps[i];
    StepVerdict v = execute_step(*engines[script.position_of(step.as)], report.instanceId, step);
    v.index = i + 1;
    if (!v.matches()) ++report.mismatches;
    report.steps.push_back(std::move(v));
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace zkwf
