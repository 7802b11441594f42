#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "zkwf/schedule.hpp"

using namespace zkwf;
using namespace zkwf::testing;

namespace {

RingConfig config(std::size_t tail, std::size_t minEpochs = 0) {
  RingConfig cfg;
  cfg.quantumMs = 1000;
  cfg.tailEpochs = tail;
  cfg.minEpochs = minEpochs;
  return cfg;
}

void expect_one_tx_per_epoch(const RingRun& run) {
  ASSERT_EQ(run.trace.txs.size(), run.report.epochs.size());
  for (std::size_t i = 0; i < run.trace.txs.size(); ++i) {
    EXPECT_EQ(run.trace.txs[i].epoch, static_cast<std::int64_t>(i));
    EXPECT_TRUE(run.report.epochs[i].accepted) << run.report.epochs[i].note;
  }
  EXPECT_EQ(run.metrics.txsPerEpoch, (std::map<std::size_t, std::size_t>{{1, run.report.epochs.size()}}));
  EXPECT_FALSE(run.metrics.exposure);
  EXPECT_EQ(run.report.errors, 0u);
}

}  // namespace

TEST(Ring, IdleRunIsRoundRobinFakes) {
  auto run = ring_on("nested", {"alice", "bob", "carol"}, {}, config(4, 6));
  ASSERT_EQ(run.report.epochs.size(), 6u);
  for (std::size_t e = 0; e < 6; ++e) {
    EXPECT_EQ(run.report.epochs[e].participant, e % 3);
    EXPECT_EQ(run.report.epochs[e].decision, "fake");
  }
  expect_one_tx_per_epoch(run);
  EXPECT_EQ(run.history.size(), 7u);
}

TEST(Ring, ShortProcessWithTwoParticipants) {
  std::deque<PendingAction> pending = {{0, StepAction::start("s")},
                                       {0, StepAction::complete("s")},
                                       {0, StepAction::complete("a")}};
  auto run = ring_on("diamond", {"alice", "bob"}, pending, config(4));
  expect_one_tx_per_epoch(run);
  std::vector<std::string> decisions;
  for (const auto& e : run.report.epochs) decisions.push_back(e.decision);
  // alice acts on even epochs only, bob fills in with fakes
  EXPECT_EQ(decisions, (std::vector<std::string>{"real", "fake", "real", "fake", "real", "fake", "fake", "fake",
                                                 "fake"}));
  ASSERT_TRUE(run.report.completedAt);
  EXPECT_EQ(*run.report.completedAt, 4u);
}

TEST(Ring, TailFollowsCompletion) {
  std::deque<PendingAction> pending = {{0, StepAction::start("s")}};
  auto run = ring_on("diamond", {"alice", "bob"}, pending, config(4));
  ASSERT_TRUE(run.report.completedAt);
  const std::size_t k = *run.report.completedAt;
  EXPECT_EQ(run.report.epochs.back().epoch, k + 4);
  EXPECT_EQ(run.trace.txs.back().epoch, static_cast<std::int64_t>(k + 4));
}

TEST(Ring, InapplicableActionIsDroppedAndLogged) {
  std::deque<PendingAction> pending = {{0, StepAction::complete("d")}, {0, StepAction::start("s")}};
  auto run = ring_on("diamond", {"alice", "bob"}, pending, config(2));
  EXPECT_EQ(run.report.errors, 1u);
  EXPECT_EQ(run.report.epochs[0].decision, "fake");
  EXPECT_NE(run.report.epochs[0].note.find("dropped"), std::string::npos);
  EXPECT_TRUE(run.report.epochs[0].accepted);
  EXPECT_EQ(run.report.epochs[2].decision, "real");
}

TEST(Ring, MissedEpochIsLoggedNotFatal) {
  auto cfg = config(0, 6);
  cfg.offline = {1};
  auto run = ring_on("nested", {"alice", "bob", "carol"}, {}, cfg);
  ASSERT_EQ(run.report.epochs.size(), 6u);
  EXPECT_EQ(run.report.epochs[1].decision, "missed");
  EXPECT_EQ(run.report.epochs[4].decision, "missed");
  EXPECT_EQ(run.trace.txs.size(), 4u);
  EXPECT_EQ(run.metrics.txsPerEpoch.at(0), 2u);
  EXPECT_TRUE(run.metrics.exposure);
}

TEST(Ring, DistinctTracesLookTheSame) {
  std::deque<PendingAction> head = {{0, StepAction::start("s")}, {0, StepAction::complete("s")},
                                    {0, StepAction::complete("a")}};
  auto one = head, two = head;
  one.push_back({0, StepAction::complete("b")});
  one.push_back({1, StepAction::complete("c")});
  two.push_back({1, StepAction::complete("c")});
  two.push_back({0, StepAction::complete("b")});
  auto a = ring_on("diamond", {"alice", "bob"}, one, config(4, 20));
  auto b = ring_on("diamond", {"alice", "bob"}, two, config(4, 20));
  expect_one_tx_per_epoch(a);
  expect_one_tx_per_epoch(b);
  EXPECT_EQ(a.trace.txs, b.trace.txs);
  EXPECT_EQ(a.metrics.to_json(), b.metrics.to_json());
  // same observable shape, different business content
  EXPECT_NE(a.history[6].record.h_current, b.history[6].record.h_current);
}

TEST(Ring, RejectsBadConfig) {
  auto d = corpus_descriptor("diamond");
  Ledger ledger;
  ParticipantEngine alice({KeyPair::from_seed("alice"), SymmetricKey{}, d}, ledger);
  RingConfig cfg;
  cfg.participants = {"alice"};
  std::vector<ParticipantEngine*> engines = {&alice};
  VirtualClock clock;
  EXPECT_THROW(run_ring(cfg, engines, "x", {}, &clock), std::invalid_argument);
}

TEST(Observer, DirectSubmissionsExposeTiming) {
  auto d = corpus_descriptor("diamond");
  VirtualClock clock(0);
  Ledger::Options opts;
  opts.clock = clock.source();
  Ledger ledger(opts);
  SeededRandom rng(2);
  ParticipantEngine alice({KeyPair::from_seed("alice"), SymmetricKey{}, d}, ledger, rng);
  ParticipantEngine bob({KeyPair::from_seed("bob"), SymmetricKey{}, d}, ledger, rng);
  auto id = alice.deploy();
  // bursts and pauses, as a business process would produce on its own
  struct Move {
    ParticipantEngine* who;
    StepAction action;
    std::int64_t gap;
  };
  const std::vector<Move> moves = {{&alice, StepAction::start("s"), 100},   {&alice, StepAction::complete("s"), 150},
                                   {&alice, StepAction::complete("a"), 4000}, {&alice, StepAction::complete("b"), 50},
                                   {&bob, StepAction::complete("c"), 9000},  {&alice, StepAction::complete("d"), 300},
                                   {&alice, StepAction::complete("e"), 200}};
  const std::int64_t start = clock.now_ms();
  for (const auto& m : moves) {
    clock.advance(m.gap);
    ASSERT_TRUE(m.who->step(id, m.action).accepted) << m.action.describe();
  }
  auto metrics = measure(observe(ledger.get_history(id), start, 1000), 1000);
  EXPECT_TRUE(metrics.exposure);
  EXPECT_GT(metrics.interArrivalVariance, 0.01 * 1000 * 1000);
}

TEST(Observer, MetricsOnSyntheticTraces) {
  ObserverTrace flat;
  for (int i = 0; i < 10; ++i) flat.txs.push_back({i, 500 + 1000 * i, 300});
  auto m = measure(flat, 1000);
  EXPECT_FALSE(m.exposure);
  EXPECT_EQ(m.epochsSpanned, 10u);
  EXPECT_DOUBLE_EQ(m.interArrivalVariance, 0);

  auto sized = flat;
  sized.txs[3].size = 301;
  EXPECT_TRUE(measure(sized, 1000).exposure);

  auto gap = flat;
  gap.txs.erase(gap.txs.begin() + 4);
  auto g = measure(gap, 1000);
  EXPECT_TRUE(g.exposure);
  EXPECT_EQ(g.txsPerEpoch.at(0), 1u);
}
