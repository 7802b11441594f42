#pragma once

// Local HTTP bridge for UI clients. The bridge holds the participant's keys
// and does decryption, proposal and proving; clients see JSON only.
//
//   GET  /bridge/state         decrypted state of the bound instance
//   POST /bridge/step          {"action": "complete"|"start"|"fake", "element",
//                               "set": {var: int}, "message", "messageHex", "branch"}
//   GET  /bridge/events?from=k server-sent stream of accepted updates

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "zkwf/participant.hpp"

namespace zkwf {

/// JSON view of a decrypted state: elements, variables and message slots.
nlohmann::json describe_state(const StatementDescriptor& d, const ProcessState& s, const PublicKey* viewer = nullptr);

/// Parses the body of POST /bridge/step (also used by the CLI).
StepAction step_action_from_json(const nlohmann::json& body);

class BridgeServer {
 public:
  BridgeServer(ParticipantEngine& engine, std::string instanceId);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  /// Serves on a background thread; port 0 picks a free port.
  int start(const std::string& host, int port);
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace zkwf
