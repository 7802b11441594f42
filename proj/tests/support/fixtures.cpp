#include "fixtures.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <mutex>
#include <set>

namespace zkwf::testing {

std::string model_path(const std::string& name) { return std::string(ZKWF_MODELS_DIR) + "/" + name + ".bpmn"; }

std::string scenario_path(const std::string& name) {
  return std::string(ZKWF_SCENARIOS_DIR) + "/" + name + ".yaml";
}

const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {"linear",  "diamond",   "exclusive", "nested",
                                                 "message", "multipool", "lanes",     "leasing"};
  return names;
}

std::vector<std::string> small_corpus() {
  std::vector<std::string> out;
  for (const auto& n : corpus_names()) {
    if (corpus_descriptor(n)->index.size() <= 12) out.push_back(n);
  }
  return out;
}

namespace {
std::mutex cache_mu;
std::map<std::string, std::unique_ptr<Model>> model_cache;
std::map<std::string, std::shared_ptr<const StatementDescriptor>> descriptor_cache;
}  // namespace

const Model& corpus_model(const std::string& name) {
  std::lock_guard lock(cache_mu);
  auto& slot = model_cache[name];
  if (!slot) slot = std::make_unique<Model>(load_bpmn_file(model_path(name)));
  return *slot;
}

std::shared_ptr<const StatementDescriptor> corpus_descriptor(const std::string& name) {
  const Model& m = corpus_model(name);
  std::lock_guard lock(cache_mu);
  auto& slot = descriptor_cache[name];
  if (!slot) slot = std::make_shared<const StatementDescriptor>(build_descriptor(m));
  return slot;
}

const std::vector<std::string>& key_seeds() {
  static const std::vector<std::string> seeds = {"alice",  "bob",  "carol",   "lessee",
                                                 "dealer", "bank", "insurer", "registry"};
  return seeds;
}

std::optional<KeyPair> key_for(const PublicKey& pk) {
  for (const auto& s : key_seeds()) {
    auto kp = KeyPair::from_seed(s);
    if (kp.pk == pk) return kp;
  }
  return std::nullopt;
}

std::vector<KeyPair> participants_of(const StatementDescriptor& d) {
  std::vector<KeyPair> out;
  for (const auto& pk : d.participantKeys) {
    auto kp = key_for(pk);
    if (!kp) throw std::runtime_error("no demo seed for participant key " + pk.hex());
    out.push_back(*kp);
  }
  return out;
}

KeyPair outsider_key() { return KeyPair::from_seed("mallory"); }

namespace {

void collect_literals(const ConditionNode& n, std::map<std::size_t, std::set<std::int64_t>>& out) {
  auto literal = [](const ConditionNode* x) { return x && x->op == ConditionOp::IntLiteral; };
  auto var = [](const ConditionNode* x) { return x && x->op == ConditionOp::Variable; };
  if (var(n.lhs.get()) && literal(n.rhs.get())) out[n.lhs->variable].insert(n.rhs->value);
  if (literal(n.lhs.get()) && var(n.rhs.get())) out[n.rhs->variable].insert(n.lhs->value);
  if (n.lhs) collect_literals(*n.lhs, out);
  if (n.rhs) collect_literals(*n.rhs, out);
}

}  // namespace

std::vector<std::vector<std::int64_t>> variable_domains(const StatementDescriptor& d) {
  std::map<std::size_t, std::set<std::int64_t>> lits;
  for (const auto& c : d.conditions) collect_literals(c.expr.root(), lits);
  std::vector<std::vector<std::int64_t>> out(d.variables.size());
  for (std::size_t k = 0; k < d.variables.size(); ++k) {
    std::set<std::int64_t> dom = {0};
    for (auto c : lits[k]) {
      dom.insert(c - 1);
      dom.insert(c);
      dom.insert(c + 1);
    }
    out[k].assign(dom.begin(), dom.end());
  }
  return out;
}

std::vector<std::vector<std::int64_t>> variable_assignments(const StatementDescriptor& d) {
  auto doms = variable_domains(d);
  std::vector<std::vector<std::int64_t>> out = {{}};
  for (const auto& dom : doms) {
    std::vector<std::vector<std::int64_t>> next;
    for (const auto& prefix : out) {
      for (auto x : dom) {
        auto p = prefix;
        p.push_back(x);
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::vector<std::uint8_t>> reachable_markings(const Model& m, const StatementDescriptor& d) {
  const auto assignments = variable_assignments(d);
  std::set<std::vector<std::uint8_t>> seen;
  std::deque<std::vector<std::uint8_t>> queue;
  std::vector<std::uint8_t> zero(d.index.size(), 0);
  seen.insert(zero);
  queue.push_back(zero);
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (const auto& vars : assignments) {
      for (const auto& next : oracle_step(m, v, vars)) {
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
  }
  return {seen.begin(), seen.end()};
}

std::vector<std::vector<std::uint8_t>> neighbours(const std::vector<std::uint8_t>& v) {
  std::vector<std::vector<std::uint8_t>> out;
  const std::size_t n = v.size();
  std::function<void(std::size_t, std::size_t, std::vector<std::uint8_t>&)> rec =
      [&](std::size_t from, std::size_t left, std::vector<std::uint8_t>& cur) {
        if (cur != v) out.push_back(cur);
        if (left == 0) return;
        for (std::size_t i = from; i < n; ++i) {
          for (std::uint8_t x = 0; x <= 2; ++x) {
            if (x == v[i]) continue;
            cur[i] = x;
            rec(i + 1, left - 1, cur);
            cur[i] = v[i];
          }
        }
      };
  auto cur = v;
  rec(0, 3, cur);
  return out;
}

Digest slot_hash(std::size_t slot) { return sha256(as_bytes("test-message-" + std::to_string(slot))); }

ProcessState make_state(const StatementDescriptor& d, const std::vector<std::uint8_t>& v,
                        const std::vector<std::int64_t>& vars) {
  ProcessState s = ProcessState::zero(StateShape::of(d));
  s.v = v;
  s.vars = vars;
  for (std::size_t k = 0; k < d.msgSlots.size(); ++k) {
    if (v[d.msgSlots[k].throwIndex] == 2) s.msgHashes[k] = slot_hash(k);
  }
  return s;
}

std::vector<WalkStep> random_walk(const Model& m, const StatementDescriptor& d, std::mt19937_64& rng,
                                  const WalkOptions& opts) {
  const auto domains = variable_domains(d);
  std::vector<WalkStep> steps;
  ProcessState cur = ProcessState::zero(StateShape::of(d));
  std::uniform_real_distribution<double> coin(0, 1);

  while (steps.size() < opts.maxSteps) {
    auto succ = oracle_step(m, cur.v, cur.vars);
    if (succ.empty()) break;
    if (coin(rng) < opts.fakeRate) {
      steps.push_back({cur, cur, StepAction::fake(), std::nullopt});
      continue;
    }
    std::vector<std::vector<std::uint8_t>> options(succ.begin(), succ.end());
    auto pick = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];

    std::optional<std::size_t> completed;
    for (std::size_t i = 0; i < pick.size(); ++i) {
      if (cur.v[i] == 1 && pick[i] == 2) completed = i;
    }
    ProcessState next = cur;
    StepAction action;
    std::size_t actor = 0;
    if (!completed) {
      std::size_t started = 0;
      for (std::size_t i = 0; i < pick.size(); ++i) {
        if (cur.v[i] == 0 && pick[i] == 1) started = i;
      }
      action = StepAction::start(d.index[started].id);
      actor = started;
      next.v = pick;
    } else {
      const std::size_t t = *completed;
      actor = t;
      std::map<std::string, std::int64_t> writes;
      for (std::size_t k = 0; k < d.variables.size(); ++k) {
        if (!d.varWriters[k].count(t)) continue;
        const auto& dom = domains[k];
        const auto value = dom[std::uniform_int_distribution<std::size_t>(0, dom.size() - 1)(rng)];
        writes[d.variables[k]] = value;
        next.vars[k] = value;
      }
      // Routing reads the new values, so pick again under them.
      std::vector<std::vector<std::uint8_t>> routed;
      for (const auto& cand : oracle_step(m, cur.v, next.vars)) {
        if (cand[t] == 2 && cur.v[t] == 1) {
          bool only_t = true;
          for (std::size_t i = 0; i < cand.size(); ++i) {
            if (i != t && cur.v[i] == 1 && cand[i] == 2) only_t = false;
          }
          if (only_t) routed.push_back(cand);
        }
      }
      if (routed.empty()) throw std::logic_error("walk: no routing after completing " + d.index[t].id);
      next.v = routed[std::uniform_int_distribution<std::size_t>(0, routed.size() - 1)(rng)];
      std::optional<Bytes> message;
      if (auto slot = d.slot_of_throw(t)) {
        Bytes msg(16);
        for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
        next.msgHashes[*slot] = sha256(msg);
        message = msg;
      }
      action = StepAction::complete(d.index[t].id, writes, message);
      for (std::size_t i = 0; i < next.v.size(); ++i) {
        if (cur.v[i] == 0 && next.v[i] == 1) {
          action.branch = d.index[i].id;
          break;
        }
      }
    }
    steps.push_back({cur, next, action, actor});
    cur = next;
  }
  return steps;
}

RingRun ring_on(const std::string& model, const std::vector<std::string>& seeds, std::deque<PendingAction> pending,
                RingConfig cfg) {
  auto d = corpus_descriptor(model);
  VirtualClock clock(0);
  Ledger::Options opts;
  opts.clock = clock.source();
  Ledger ledger(opts);
  SeededRandom rng(1234);
  const auto group = SymmetricKey::from_hex(std::string(64, 'e'));
  std::vector<std::unique_ptr<ParticipantEngine>> owned;
  std::vector<ParticipantEngine*> engines;
  for (const auto& seed : seeds) {
    owned.push_back(std::make_unique<ParticipantEngine>(ParticipantConfig{KeyPair::from_seed(seed), group, d}, ledger, rng));
    engines.push_back(owned.back().get());
  }
  const std::string id = engines.front()->deploy();
  clock.advance(cfg.quantumMs);
  cfg.participants = seeds;
  RingRun run;
  run.report = run_ring(cfg, engines, id, std::move(pending), &clock);
  run.history = ledger.get_history(id);
  run.trace = observe(run.history, run.report.startMs, cfg.quantumMs);
  run.metrics = measure(run.trace, cfg.quantumMs);
  return run;
}

std::deque<PendingAction> pending_from_walk(const StatementDescriptor& d, const std::vector<WalkStep>& walk,
                                            const std::vector<std::string>& seeds) {
  std::deque<PendingAction> out;
  for (const auto& step : walk) {
    if (!step.actor) continue;
    const PublicKey& owner = d.owner_of(*step.actor);
    std::size_t pos = seeds.size();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (KeyPair::from_seed(seeds[i]).pk == owner) pos = i;
    }
    if (pos == seeds.size()) throw std::runtime_error("no ring position owns " + d.index[*step.actor].id);
    out.push_back({pos, step.action});
  }
  return out;
}

}  // namespace zkwf::testing
