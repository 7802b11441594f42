#pragma once

// Token-passing ring schedule with fake updates, and the observer harness
// that measures what an outsider learns from ledger traffic.

#include <atomic>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zkwf/participant.hpp"

namespace zkwf {

/// Manually advanced millisecond clock for deterministic runs.
class VirtualClock {
 public:
  explicit VirtualClock(std::int64_t startMs = 0) : now_(startMs) {}
  std::int64_t now_ms() const { return now_; }
  void advance_to(std::int64_t ms) { now_ = std::max<std::int64_t>(now_, ms); }
  void advance(std::int64_t ms) { now_ += ms; }
  std::function<std::int64_t()> source() {
    return [this] { return now_.load(); };
  }

 private:
  std::atomic<std::int64_t> now_;
};

struct RingConfig {
  std::vector<std::string> participants;  // aliases, ring order
  std::int64_t quantumMs = 1000;
  std::size_t tailEpochs = 4;
  std::size_t minEpochs = 0;
  std::set<std::size_t> offline;  // ring positions that miss their epochs
};

struct PendingAction {
  std::size_t participant = 0;  // ring position
  StepAction action;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t participant = 0;
  std::string decision;  // real | fake | missed
  std::string action;
  bool accepted = false;
  std::optional<std::uint64_t> seq;
  std::string note;
};

struct RingReport {
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> completedAt;  // epoch of the last real update
  std::int64_t startMs = 0;
  std::size_t errors = 0;

  nlohmann::json to_json() const;
};

/// Drives one submission per epoch: participant (epoch mod n) submits the head
/// pending action when it owns it, otherwise a fake update. Runs until the
/// queue drains plus tailEpochs. With a VirtualClock time is simulated;
/// without one each epoch sleeps for the quantum.
RingReport run_ring(const RingConfig& cfg, const std::vector<ParticipantEngine*>& engines, const std::string& instanceId,
                    std::deque<PendingAction> pending, VirtualClock* clock);

struct ObservedTx {
  std::int64_t epoch = 0;
  std::int64_t arrivalMs = 0;
  std::size_t size = 0;
  bool operator==(const ObservedTx&) const = default;
};

struct ObserverTrace {
  std::vector<ObservedTx> txs;
};

struct ObserverMetrics {
  std::size_t epochsSpanned = 0;
  std::map<std::size_t, std::size_t> txsPerEpoch;  // tx count -> number of epochs
  double interArrivalVariance = 0;
  double sizeVariance = 0;
  bool exposure = false;  // traffic deviates from one tx per epoch at constant rate

  nlohmann::json to_json() const;
};

/// Builds the external view of history entries with seq >= fromSeq.
ObserverTrace observe(const std::vector<HistoryEntry>& history, std::int64_t startMs, std::int64_t quantumMs,
                      std::uint64_t fromSeq = 1);
ObserverMetrics measure(const ObserverTrace& trace, std::int64_t quantumMs);

}  // namespace zkwf
