#include <iostream>

#include <CLI11.hpp>

#include "zkwf/cli.hpp"

namespace {

void add_identity(CLI::App* cmd, zkwf::cli::Identity& id, bool needKey = true) {
  cmd->add_option("--config", id.configFile, "participant config JSON (overrides flags)");
  cmd->add_option("--descriptor", id.descriptor, "compiled descriptor (.zkwf.json) or BPMN model");
  if (needKey) cmd->add_option("--key", id.keyFile, "participant key file");
  cmd->add_option("--group-key", id.groupKeyFile, "group key file");
  cmd->add_option("--ledger", id.ledgerUrl, "ledger URL (default $ZKWF_LEDGER_URL)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace zkwf::cli;
  CLI::App app{"zkwf: confidential BPMN collaborations over a commitment ledger"};
  app.require_subcommand(1);
  Io io{std::cout, std::cerr};
  int code = kOk;

  std::string model, out;
  auto* compile = app.add_subcommand("compile", "validate a BPMN model and write its statement descriptor");
  compile->add_option("model", model, "BPMN file")->required();
  compile->add_option("-o,--out", out, "output path (default <model>.zkwf.json, '-' for stdout)");
  compile->callback([&] { code = cmd_compile(io, model, out); });

  std::string keyOut, seed;
  bool group = false;
  auto* keygen = app.add_subcommand("keygen", "create a participant key pair or a group key");
  keygen->add_option("--out", keyOut, "output file")->required();
  keygen->add_option("--seed", seed, "derive deterministically from a demo seed");
  keygen->add_flag("--group", group, "write a 32-byte group key instead");
  keygen->callback([&] { code = cmd_keygen(io, keyOut, seed, group); });

  Identity deployId;
  auto* deploy = app.add_subcommand("deploy", "deploy a new instance with a signed zero-state genesis");
  add_identity(deploy, deployId);
  deploy->callback([&] { code = cmd_deploy(io, deployId); });

  Identity stepId;
  StepFlags step;
  auto* stepCmd = app.add_subcommand("step", "sync, propose, prove and submit one update");
  add_identity(stepCmd, stepId);
  stepCmd->add_option("--instance", step.instance, "instance id")->required();
  stepCmd->add_option("--complete", step.complete, "complete an active element");
  stepCmd->add_option("--start", step.start, "activate a start event");
  stepCmd->add_flag("--fake", step.fake, "post a state-preserving update");
  stepCmd->add_option("--set", step.sets, "variable write var=value (repeatable)");
  stepCmd->add_option("--message", step.messageFile, "message payload file for a throw event");
  stepCmd->add_option("--branch", step.branch, "exclusive branch target when several are enabled");
  stepCmd->callback([&] { code = cmd_step(io, stepId, step); });

  std::string script, report, scenarioLedger;
  bool wallClock = false;
  auto* run = app.add_subcommand("run-scenario", "execute a YAML scenario and check expected verdicts");
  run->add_option("script", script, "scenario file")->required();
  run->add_option("--report", report, "write a JSON report");
  run->add_flag("--wall-clock", wallClock, "use real time instead of virtual time");
  run->add_option("--ledger", scenarioLedger, "use a remote ledger instead of an in-process one");
  run->callback([&] { code = cmd_run_scenario(io, script, report, wallClock, scenarioLedger); });

  RingFlags ring;
  auto* ringCmd = app.add_subcommand("ring", "drive a scenario through the ring schedule with fake updates");
  ringCmd->add_option("scenario", ring.scenario, "scenario file (participant order is the ring order)")->required();
  ringCmd->add_option("--quantum-ms", ring.quantumMs, "epoch length")->check(CLI::PositiveNumber);
  ringCmd->add_option("--tail", ring.tailEpochs, "fake-update epochs after the process ends");
  ringCmd->add_option("--min-epochs", ring.minEpochs, "run at least this many epochs");
  ringCmd->add_flag("--wall-clock", ring.wallClock, "sleep through real epochs");
  ringCmd->add_option("--report", ring.reportPath, "write a JSON report");
  ringCmd->callback([&] { code = cmd_ring(io, ring); });

  Identity inspectId;
  std::string inspectInstance;
  auto* inspect = app.add_subcommand("inspect", "dump an instance; decrypts when a group key is given");
  add_identity(inspect, inspectId, false);
  inspect->add_option("--instance", inspectInstance, "instance id")->required();
  inspect->callback([&] { code = cmd_inspect(io, inspectId, inspectInstance); });

  std::string host = "127.0.0.1", dataDir;
  int port = 8750;
  auto* serve = app.add_subcommand("serve", "run the ledger service");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port (default 8750)");
  serve->add_option("--data-dir", dataDir, "persist instances as JSON lines");
  serve->callback([&] { code = cmd_serve(io, host, port, dataDir); });

  Identity bridgeId;
  std::string bridgeInstance, bridgeHost = "127.0.0.1";
  int bridgePort = 8751;
  auto* bridge = app.add_subcommand("bridge", "serve the local UI bridge for one instance");
  add_identity(bridge, bridgeId);
  bridge->add_option("--instance", bridgeInstance, "instance id")->required();
  bridge->add_option("--host", bridgeHost, "listen address");
  bridge->add_option("--port", bridgePort, "listen port (default 8751)");
  bridge->callback([&] { code = cmd_bridge(io, bridgeId, bridgeInstance, bridgeHost, bridgePort); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }
  return code;
}
