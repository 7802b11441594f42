#pragma once

// Participant-side engine: sync and audit on-ledger state, build step
// proposals, produce update transactions and check off-chain messages.

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "zkwf/ledger.hpp"

namespace zkwf {

struct ParticipantConfig {
  KeyPair keyPair;
  SymmetricKey groupKey;
  std::shared_ptr<const StatementDescriptor> descriptor;
  std::string backendId = kTransparentBackend;
};

struct StepAction {
  enum class Kind { Complete, ActivateStart, Fake };

  Kind kind = Kind::Fake;
  std::string elementId;
  std::map<std::string, std::int64_t> writes;
  std::optional<Bytes> message;
  /// Selects the branch target when more than one exclusive branch is enabled.
  std::optional<std::string> branch;

  static StepAction complete(std::string id, std::map<std::string, std::int64_t> writes = {},
                             std::optional<Bytes> message = std::nullopt);
  static StepAction start(std::string id);
  static StepAction fake();
  std::string describe() const;
};

/// The proposed action is not applicable in the given state.
class ProposeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// On-ledger ciphertext does not open to the committed state.
class CongruenceViolation : public std::runtime_error {
 public:
  CongruenceViolation(std::optional<PublicKey> signer, std::uint64_t seq, const std::string& detail);
  /// Participant key whose signature commitment covers the offending record.
  const std::optional<PublicKey>& signer() const { return signer_; }
  std::uint64_t seq() const { return seq_; }

 private:
  std::optional<PublicKey> signer_;
  std::uint64_t seq_;
};

/// Ring mode forbids submissions that do not come from the scheduler.
class RingModeActive : public std::runtime_error {
 public:
  RingModeActive() : std::runtime_error("engine is in ring mode; only the scheduler may submit") {}
};

struct SyncedState {
  ProcessState state;
  Salt salt;
  CommitmentRecord record;
  std::uint64_t seq = 0;  // history position of `record`
};

struct StepOutcome {
  bool accepted = false;
  SyncedState before;
  ProcessState proposed;
  std::optional<UpdateTx> tx;
  std::optional<std::uint64_t> seq;
  std::string message;
};

/// Participant key whose signature verifies over h_prev || h (genesis: zero prefix).
std::optional<PublicKey> identify_signer(const StatementDescriptor& d, const std::optional<Commitment>& h_prev,
                                         const CommitmentRecord& record);

/// Walks a history and checks each signature commitment chains consecutive
/// commitments under some participant key. Returns the first broken seq.
std::optional<std::uint64_t> audit_chain(const StatementDescriptor& d, const std::vector<HistoryEntry>& history);

class ParticipantEngine {
 public:
  ParticipantEngine(ParticipantConfig cfg, LedgerApi& ledger, RandomSource& rng = system_random());

  const ParticipantConfig& config() const { return cfg_; }
  const StatementDescriptor& descriptor() const { return *cfg_.descriptor; }
  const PublicKey& public_key() const { return cfg_.keyPair.pk; }
  LedgerApi& ledger() { return ledger_; }

  /// Sets up the backend, signs a zero-state genesis and deploys it.
  std::string deploy();

  /// Fetches new history, decrypts the current record and audits it.
  /// Throws CongruenceViolation when the ciphertext does not open to h_current.
  SyncedState sync(const std::string& instanceId);

  ProcessState propose(const ProcessState& s_cur, const StepAction& action) const;

  /// Throws StatementRefused when the local proof is refused.
  UpdateTx build_update(const SyncedState& cur, const ProcessState& s_new);

  SubmitResult submit(const std::string& instanceId, const UpdateTx& tx);
  /// sync, propose, build_update and submit in one call.
  StepOutcome step(const std::string& instanceId, const StepAction& action);

  /// SHA-256(bytes) == s.msgHashes[slot]. Throws ProposeError when the throw
  /// for `slot` has not completed in s.
  bool receive_message(const ProcessState& s, std::size_t slot, ByteView bytes) const;

  void set_ring_mode(bool on) { ringMode_ = on; }
  bool ring_mode() const { return ringMode_; }
  /// Submission path reserved for the ring scheduler.
  SubmitResult submit_scheduled(const std::string& instanceId, const UpdateTx& tx);

  /// Elements this participant owns.
  std::vector<std::string> owned_elements() const;

 private:
  struct Cache {
    std::vector<HistoryEntry> history;
  };

  ParticipantConfig cfg_;
  LedgerApi& ledger_;
  RandomSource& rng_;
  ProverKey proverKey_;
  VerifierKey verifierKey_;
  std::atomic<bool> ringMode_{false};
  std::mutex mu_;
  std::map<std::string, Cache> caches_;
};

/// In-process byte pipe for off-chain messages.
class MessageChannel {
 public:
  void send(Bytes message);
  std::optional<Bytes> receive();
  std::size_t pending() const;

 private:
  mutable std::mutex mu_;
  std::deque<Bytes> queue_;
};

inline void send_message(MessageChannel& channel, Bytes message) { channel.send(std::move(message)); }

// ---- key and config files ----

/// {"publicKey": hex, "secretKey": hex}, written with owner-only permissions.
void save_key_file(const KeyPair& kp, const std::filesystem::path& path);
KeyPair load_key_file(const std::filesystem::path& path);
/// {"groupKey": hex}
void save_group_key(const SymmetricKey& key, const std::filesystem::path& path);
SymmetricKey load_group_key(const std::filesystem::path& path);

struct ParticipantFileConfig {
  std::string keyFile;
  std::string groupKeyFile;
  std::string descriptor;
  std::string ledgerUrl;
};
ParticipantFileConfig load_participant_config(const std::filesystem::path& path);

}  // namespace zkwf
