#include "zkwf/schedule.hpp"

#include <cmath>
#include <iostream>
#include <thread>

namespace zkwf {

nlohmann::json RingReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : epochs) {
    nlohmann::json j{{"epoch", r.epoch},
                     {"participant", r.participant},
                     {"decision", r.decision},
                     {"action", r.action},
                     {"accepted", r.accepted}};
    j["seq"] = r.seq ? nlohmann::json(*r.seq) : nlohmann::json(nullptr);
    if (!r.note.empty()) j["note"] = r.note;
    arr.push_back(j);
  }
  nlohmann::json out{{"epochs", arr}, {"startMs", startMs}, {"errors", errors}};
  out["completedAt"] = completedAt ? nlohmann::json(*completedAt) : nlohmann::json(nullptr);
  return out;
}

RingReport run_ring(const RingConfig& cfg, const std::vector<ParticipantEngine*>& engines, const std::string& instanceId,
                    std::deque<PendingAction> pending, VirtualClock* clock) {
  const std::size_t n = engines.size();
  if (n < 2 || cfg.participants.size() != n) throw std::invalid_argument("ring needs at least two participants");
  if (cfg.quantumMs <= 0) throw std::invalid_argument("ring quantum must be positive");
  for (const auto& a : pending) {
    if (a.participant >= n) throw std::invalid_argument("pending action for unknown ring position");
  }

  auto now = [&] {
    using namespace std::chrono;
    return clock ? clock->now_ms() : duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  };
  struct RingModeGuard {
    const std::vector<ParticipantEngine*>& engines;
    explicit RingModeGuard(const std::vector<ParticipantEngine*>& e) : engines(e) {
      for (auto* eng : engines) eng->set_ring_mode(true);
    }
    ~RingModeGuard() {
      for (auto* eng : engines) eng->set_ring_mode(false);
    }
  } guard(engines);

  RingReport report;
  report.startMs = now();
  auto finished = [&](std::size_t epoch) {
    if (epoch < cfg.minEpochs) return false;
    if (!pending.empty()) return false;
    std::size_t tailStart = report.completedAt ? *report.completedAt + 1 : 0;
    return epoch >= tailStart + cfg.tailEpochs;
  };

  for (std::size_t epoch = 0; !finished(epoch); ++epoch) {
    const std::int64_t epochStart = report.startMs + static_cast<std::int64_t>(epoch) * cfg.quantumMs;
    const std::int64_t slot = epochStart + cfg.quantumMs / 2;
    if (clock) {
      clock->advance_to(slot);
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(std::max<std::int64_t>(0, slot - now())));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.participant = epoch % n;
    if (cfg.offline.count(rec.participant)) {
      rec.decision = "missed";
      rec.note = "participant " + cfg.participants[rec.participant] + " missed its epoch";
      std::clog << "ring: epoch " << epoch << ": " << rec.note << '\n';
      report.epochs.push_back(rec);
      continue;
    }

    ParticipantEngine& engine = *engines[rec.participant];
    try {
      SyncedState cur = engine.sync(instanceId);
      ProcessState s_new = cur.state;
      bool real = false;
      if (!pending.empty() && pending.front().participant == rec.participant) {
        rec.action = pending.front().action.describe();
        try {
          s_new = engine.propose(cur.state, pending.front().action);
          real = true;
        } catch (const ProposeError& e) {
          rec.note = std::string("dropped inapplicable action: ") + e.what();
          ++report.errors;
        }
        pending.pop_front();
      }
      rec.decision = real ? "real" : "fake";
      if (!real && rec.action.empty()) rec.action = "fake";
      auto tx = engine.build_update(cur, s_new);
      auto result = engine.submit_scheduled(instanceId, tx);
      rec.accepted = result.accepted;
      if (result.accepted) {
        rec.seq = result.seq;
        if (real) report.completedAt = epoch;
      } else {
        rec.note = result.message;
        ++report.errors;
      }
    } catch (const std::exception& e) {
      rec.note = e.what();
      ++report.errors;
    }
    report.epochs.push_back(rec);
  }
  return report;
}

ObserverTrace observe(const std::vector<HistoryEntry>& history, std::int64_t startMs, std::int64_t quantumMs,
                      std::uint64_t fromSeq) {
  ObserverTrace trace;
  for (const auto& e : history) {
    if (e.seq < fromSeq) continue;
    std::int64_t offset = e.wallClockMs - startMs;
    std::int64_t epoch = offset >= 0 ? offset / quantumMs : -1 - (-offset - 1) / quantumMs;
    trace.txs.push_back({epoch, e.wallClockMs, e.observable_size()});
  }
  return trace;
}

namespace {

double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0;
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double acc = 0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(xs.size());
}

}  // namespace

ObserverMetrics measure(const ObserverTrace& trace, std::int64_t quantumMs) {
  ObserverMetrics m;
  if (trace.txs.empty()) return m;
  std::map<std::int64_t, std::size_t> perEpoch;
  std::int64_t first = trace.txs.front().epoch;
  std::int64_t last = first;
  std::vector<double> gaps;
  std::vector<double> sizes;
  for (std::size_t i = 0; i < trace.txs.size(); ++i) {
    const auto& tx = trace.txs[i];
    ++perEpoch[tx.epoch];
    first = std::min(first, tx.epoch);
    last = std::max(last, tx.epoch);
    sizes.push_back(static_cast<double>(tx.size));
    if (i > 0) gaps.push_back(static_cast<double>(tx.arrivalMs - trace.txs[i - 1].arrivalMs));
  }
  m.epochsSpanned = static_cast<std::size_t>(last - first + 1);
  for (std::int64_t e = first; e <= last; ++e) {
    auto it = perEpoch.find(e);
    ++m.txsPerEpoch[it == perEpoch.end() ? 0 : it->second];
  }
  m.interArrivalVariance = variance(gaps);
  m.sizeVariance = variance(sizes);
  const double q = static_cast<double>(quantumMs);
  const bool pointMass = m.txsPerEpoch.size() == 1 && m.txsPerEpoch.begin()->first == 1;
  m.exposure = !pointMass || m.interArrivalVariance > 0.01 * q * q || m.sizeVariance > 0;
  return m;
}

nlohmann::json ObserverMetrics::to_json() const {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [count, epochs] : txsPerEpoch) hist[std::to_string(count)] = epochs;
  return {{"epochsSpanned", epochsSpanned},
          {"txsPerEpoch", hist},
          {"interArrivalVariance", interArrivalVariance},
          {"sizeVariance", sizeVariance},
          {"exposure", exposure}};
}

}  // namespace zkwf
