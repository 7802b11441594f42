#pragma once

// Simulated orchestrator contract. Each instance keeps the current commitment
// record and an append-only history; updates are accepted only when the
// proof verifies against the instance's current commitment.
//
// The schema has no sender field: an observer sees commitments, ciphertexts,
// signatures, proofs and timestamps, nothing else.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zkwf/proof.hpp"

namespace zkwf {

struct CommitmentRecord {
  Commitment h_current;
  Bytes ciphertext;
  Signature S_current;

  bool operator==(const CommitmentRecord&) const = default;
};

struct UpdateTx {
  Commitment h_new;
  Bytes ciphertext_new;
  Signature S_new;
  Proof proof;

  bool operator==(const UpdateTx&) const = default;
};

/// One accepted history entry. Entry 0 is the genesis record and has no proof.
struct HistoryEntry {
  std::uint64_t seq = 0;
  std::uint64_t logicalTime = 0;
  std::int64_t wallClockMs = 0;
  CommitmentRecord record;
  std::optional<Proof> proof;

  /// Bytes an external observer sees for this entry.
  std::size_t observable_size() const;
  bool operator==(const HistoryEntry&) const = default;
};

struct SubmitResult {
  bool accepted = false;
  std::uint64_t seq = 0;  // history position when accepted
  std::string message;
};

class LedgerError : public std::runtime_error {
 public:
  LedgerError(std::string code, const std::string& message) : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Signature-commitment message for the genesis record: 32 zero bytes || h.
Bytes genesis_message(const Commitment& h);

/// Operations shared by the in-process ledger and the HTTP client.
class LedgerApi {
 public:
  virtual ~LedgerApi() = default;
  virtual std::string deploy(const VerifierKey& vk, const Digest& descriptorDigest, const CommitmentRecord& genesis) = 0;
  virtual SubmitResult submit_update(const std::string& instanceId, const UpdateTx& tx) = 0;
  virtual CommitmentRecord get_state(const std::string& instanceId) = 0;
  virtual std::vector<HistoryEntry> get_history(const std::string& instanceId, std::uint64_t from = 0) = 0;
  /// Like get_history, but waits up to `timeout` for at least one entry.
  virtual std::vector<HistoryEntry> wait_history(const std::string& instanceId, std::uint64_t from,
                                                 std::chrono::milliseconds timeout) = 0;
};

/// Ordered stream of accepted updates starting at a given offset.
class Subscription {
 public:
  Subscription(LedgerApi& ledger, std::string instanceId, std::uint64_t from)
      : ledger_(ledger), instanceId_(std::move(instanceId)), next_(from) {}

  std::optional<HistoryEntry> next(std::chrono::milliseconds timeout);
  std::uint64_t offset() const { return next_; }

 private:
  LedgerApi& ledger_;
  std::string instanceId_;
  std::uint64_t next_;
  std::vector<HistoryEntry> buffer_;
  std::size_t pos_ = 0;
};

class Ledger final : public LedgerApi {
 public:
  struct Options {
    RandomSource* rng = nullptr;               // instance ids; defaults to system_random()
    std::function<std::int64_t()> clock;       // wall-clock milliseconds; defaults to system clock
    std::optional<std::filesystem::path> dataDir;  // JSON-lines persistence
  };

  Ledger();
  explicit Ledger(Options options);

  std::string deploy(const VerifierKey& vk, const Digest& descriptorDigest, const CommitmentRecord& genesis) override;
  SubmitResult submit_update(const std::string& instanceId, const UpdateTx& tx) override;
  CommitmentRecord get_state(const std::string& instanceId) override;
  std::vector<HistoryEntry> get_history(const std::string& instanceId, std::uint64_t from = 0) override;
  std::vector<HistoryEntry> wait_history(const std::string& instanceId, std::uint64_t from,
                                         std::chrono::milliseconds timeout) override;

  std::unique_ptr<Subscription> subscribe(const std::string& instanceId, std::uint64_t from = 0);
  std::vector<std::string> instances() const;
  Digest descriptor_digest(const std::string& instanceId);
  /// Wakes every blocked wait_history call; used on shutdown.
  void interrupt();

 private:
  struct Instance {
    std::string id;
    VerifierKey vk;
    Digest descriptorDigest;
    std::vector<HistoryEntry> history;
    std::mutex mu;
    std::condition_variable changed;
  };

  std::shared_ptr<Instance> find(const std::string& instanceId) const;
  void load(const std::filesystem::path& file);
  void persist(const Instance& inst, const HistoryEntry* entry, bool header);

  Options options_;
  std::uint64_t logicalClock_ = 0;
  std::mutex clockMu_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Instance>> instances_;
  std::atomic<bool> interrupted_{false};
};

// ---- JSON (hex-encoded byte fields) ----
nlohmann::json to_json(const CommitmentRecord& r);
CommitmentRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const UpdateTx& tx);
UpdateTx tx_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HistoryEntry& e);
HistoryEntry entry_from_json(const nlohmann::json& j);

// ---- HTTP surface ----

/// Serves a Ledger over HTTP/JSON; see README for the routes.
class LedgerServer {
 public:
  explicit LedgerServer(Ledger& ledger);
  ~LedgerServer();
  LedgerServer(const LedgerServer&) = delete;
  LedgerServer& operator=(const LedgerServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  int start(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class HttpLedgerClient final : public LedgerApi {
 public:
  /// url: http://host:port
  explicit HttpLedgerClient(const std::string& url);
  ~HttpLedgerClient() override;

  std::string deploy(const VerifierKey& vk, const Digest& descriptorDigest, const CommitmentRecord& genesis) override;
  SubmitResult submit_update(const std::string& instanceId, const UpdateTx& tx) override;
  CommitmentRecord get_state(const std::string& instanceId) override;
  std::vector<HistoryEntry> get_history(const std::string& instanceId, std::uint64_t from = 0) override;
  std::vector<HistoryEntry> wait_history(const std::string& instanceId, std::uint64_t from,
                                         std::chrono::milliseconds timeout) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Thrown by HttpLedgerClient when the service cannot be reached.
class ConnectionError : public LedgerError {
 public:
  explicit ConnectionError(const std::string& message) : LedgerError("CONNECTION", message) {}
};

}  // namespace zkwf
