#pragma once

// Corpus access and state helpers shared by the unit and acceptance tests.

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zkwf/model.hpp"
#include "zkwf/participant.hpp"
#include "zkwf/schedule.hpp"
#include "zkwf/semantics.hpp"
#include "zkwf/statecodec.hpp"

namespace zkwf::testing {

std::string model_path(const std::string& name);
std::string scenario_path(const std::string& name);

/// Every bundled model, by file stem.
const std::vector<std::string>& corpus_names();
/// Models small enough for exhaustive enumeration (|T| <= 12).
std::vector<std::string> small_corpus();

const Model& corpus_model(const std::string& name);
std::shared_ptr<const StatementDescriptor> corpus_descriptor(const std::string& name);

/// Demo identities used by the bundled models.
const std::vector<std::string>& key_seeds();
std::optional<KeyPair> key_for(const PublicKey& pk);
/// Key pairs for every participant key of d, ordered by public key.
std::vector<KeyPair> participants_of(const StatementDescriptor& d);
/// A key no bundled model knows about.
KeyPair outsider_key();

/// Per variable: 0 plus c-1, c, c+1 for every integer literal c compared
/// against it in some condition.
std::vector<std::vector<std::int64_t>> variable_domains(const StatementDescriptor& d);
/// Cartesian product of variable_domains.
std::vector<std::vector<std::int64_t>> variable_assignments(const StatementDescriptor& d);

/// Markings reachable from all-zero under any assignment of the domains.
std::vector<std::vector<std::uint8_t>> reachable_markings(const Model& m, const StatementDescriptor& d);

/// Every marking other than v that differs from it in one to three positions.
std::vector<std::vector<std::uint8_t>> neighbours(const std::vector<std::uint8_t>& v);

/// Deterministic nonzero hash for a thrown message slot.
Digest slot_hash(std::size_t slot);
/// State with marking v and vars; completed throws get slot_hash().
ProcessState make_state(const StatementDescriptor& d, const std::vector<std::uint8_t>& v,
                        const std::vector<std::int64_t>& vars);

/// One step of a random valid walk, expressed in terms the engine understands.
struct WalkStep {
  ProcessState before;
  ProcessState after;
  StepAction action;
  std::optional<std::size_t> actor;  // executable whose owner acts; empty for fakes
};

struct WalkOptions {
  double fakeRate = 0.1;
  std::size_t maxSteps = 400;
};

/// Random walk over oracle successors until no move is left. Writes random
/// values from the variable domains when the completing task may write.
std::vector<WalkStep> random_walk(const Model& m, const StatementDescriptor& d, std::mt19937_64& rng,
                                  const WalkOptions& opts = {});

/// Ring run on a fresh in-process ledger whose clock is a VirtualClock.
struct RingRun {
  RingReport report;
  std::vector<HistoryEntry> history;
  ObserverTrace trace;
  ObserverMetrics metrics;
};

/// seeds: ring order. Deploys at time 0 with the first seed.
RingRun ring_on(const std::string& model, const std::vector<std::string>& seeds, std::deque<PendingAction> pending,
                RingConfig cfg);

/// Real steps of a walk as ring actions; the ring position owns the actor.
std::deque<PendingAction> pending_from_walk(const StatementDescriptor& d, const std::vector<WalkStep>& walk,
                                            const std::vector<std::string>& seeds);

}  // namespace zkwf::testing
