#pragma once

// Command implementations behind the zkwf executable. Each returns a process
// exit code; messages go to the supplied streams.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zkwf::cli {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kValidation = 3,
  kIo = 4,
  kConnection = 5,
  kScenarioMismatch = 6,
  kHashMismatch = 10,
  kBadTransition = 11,
  kBadAuth = 12,
  kBadSig = 13,
  kLedgerReject = 14,
  kProposeError = 15,
  kCongruence = 16,
};

struct Io {
  std::ostream& out;
  std::ostream& err;
};

/// Identity and endpoint flags shared by deploy, step, inspect and bridge.
/// A --config file (participant config JSON) overrides these.
struct Identity {
  std::string configFile;
  std::string descriptor;
  std::string keyFile;
  std::string groupKeyFile;
  std::string ledgerUrl;  // falls back to $ZKWF_LEDGER_URL
};

int cmd_compile(Io io, const std::string& modelPath, const std::string& outPath);
int cmd_keygen(Io io, const std::string& outPath, const std::string& seed, bool group);
int cmd_deploy(Io io, Identity id);

struct StepFlags {
  std::string instance;
  std::string complete;
  std::string start;
  bool fake = false;
  std::vector<std::string> sets;  // var=value
  std::string messageFile;
  std::string branch;
};
int cmd_step(Io io, Identity id, const StepFlags& flags);

int cmd_run_scenario(Io io, const std::string& script, const std::string& reportPath, bool wallClock,
                     const std::string& ledgerUrl);

struct RingFlags {
  std::string scenario;
  std::int64_t quantumMs = 1000;
  std::size_t tailEpochs = 4;
  std::size_t minEpochs = 0;
  bool wallClock = false;
  std::string reportPath;
};
int cmd_ring(Io io, const RingFlags& flags);

int cmd_inspect(Io io, Identity id, const std::string& instance);
int cmd_serve(Io io, const std::string& host, int port, const std::string& dataDir);
int cmd_bridge(Io io, Identity id, const std::string& instance, const std::string& host, int port);

}  // namespace zkwf::cli
