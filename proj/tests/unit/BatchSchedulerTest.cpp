#include "qmux/BatchScheduler.hpp"

#include <gtest/gtest.h>

#include <map>
#include <memory>
#include <random>

using namespace qmux;

namespace {

ProcessPtr chain(std::string id, std::size_t n, std::size_t d, std::uint64_t s,
                 double arrival = 0.0) {
  std::vector<VirtualInstruction> ins(d, {Opcode::H, {data(0)}});
  return std::make_shared<const Process>(std::move(id), n, 0, s, ins, arrival);
}

SchedulerConfig exampleConfig() {
  SchedulerConfig cfg;
  cfg.lambda = 0.6;
  cfg.totalQubits = 24;
  cfg.maxShots = 100000;
  cfg.waitBound = 10.0;
  return cfg;
}

// The four-process queue of the shot-aware scheduling example.
std::vector<QueueEntry> exampleQueue() {
  return {admit(chain("P1", 8, 100, 100), 24), admit(chain("P2", 10, 10, 60), 24),
          admit(chain("P3", 12, 12, 60), 24), admit(chain("P4", 12, 80, 100), 24)};
}

Batch batchOf(std::vector<QueueEntry> members, const SchedulerConfig& cfg) {
  Batch b;
  b.members = std::move(members);
  b.shots = batchShots(b.members, cfg);
  b.totalQubits = cfg.totalQubits;
  return b;
}

std::vector<std::string> ids(const std::vector<QueueEntry>& q) {
  std::vector<std::string> out;
  for (const auto& e : q) out.push_back(e.id());
  return out;
}

} // namespace

TEST(BatchScheduler, PriorityOrderOfExample) {
  auto q = exampleQueue();
  EXPECT_EQ(q[0].totalDepthDemand(), 10000u);
  EXPECT_EQ(q[3].totalDepthDemand(), 8000u);
  EXPECT_EQ(ids(prioritize(q)),
            (std::vector<std::string>{"P2", "P3", "P4", "P1"}));
}

TEST(BatchScheduler, PriorityTieBreaks) {
  auto a = admit(chain("b", 2, 5, 10, 1.0), 24);
  auto b = admit(chain("a", 2, 10, 5, 2.0), 24);
  EXPECT_EQ(ids(prioritize({b, a})), (std::vector<std::string>{"b", "a"}));
  auto c = admit(chain("a", 2, 5, 10, 1.0), 24);
  EXPECT_EQ(ids(prioritize({a, c})), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(ids(prioritize({a})), (std::vector<std::string>{"b"}));
}

TEST(BatchScheduler, ExampleBatchAndUtility) {
  auto cfg = exampleConfig();
  auto ordered = prioritize(exampleQueue());
  auto b = formBatch(ordered, cfg, 0.0);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->memberIds(), (std::vector<std::string>{"P2", "P3"}));
  EXPECT_EQ(b->footprint(), 22u);
  EXPECT_EQ(b->reason, FormationReason::Threshold);
  EXPECT_EQ(b->shots, 60u);
  EXPECT_EQ(b->makespan(), 720u);
  EXPECT_EQ(b->capacity(), 17280u);
  EXPECT_EQ(b->work(), 14640u);
  auto aware = spaceTimeUtility(std::span(&*b, 1));
  ASSERT_TRUE(aware.has_value());
  EXPECT_NEAR(*aware, 14640.0 / 17280.0, 1e-12);

  auto q = exampleQueue();
  auto fifo = batchOf({q[0], q[1]}, cfg);
  EXPECT_EQ(fifo.shots, 60u);
  EXPECT_EQ(fifo.work(), 54000u);
  auto unaware = spaceTimeUtility(std::span(&fifo, 1));
  EXPECT_DOUBLE_EQ(*unaware, 0.375);
  EXPECT_GE(*aware / *unaware, 2.25);
  EXPECT_LE(*aware / *unaware, 2.27);
}

TEST(BatchScheduler, ArrivalOrderBaselinePicksFirstArrivals) {
  auto cfg = exampleConfig();
  std::vector<QueueEntry> q = {
      admit(chain("P1", 8, 100, 100, 0.0), 24), admit(chain("P2", 10, 10, 60, 1.0), 24),
      admit(chain("P3", 12, 12, 60, 2.0), 24), admit(chain("P4", 12, 80, 100, 3.0), 24)};
  auto b = formBatch(arrivalOrder(q), cfg, 3.0);
  ASSERT_TRUE(b.has_value());
  // First fit skip: P1 + P2 = 18, P3 would make 30, P4 30; 18 >= 14.4.
  EXPECT_EQ(b->memberIds(), (std::vector<std::string>{"P1", "P2"}));
}

TEST(BatchScheduler, WaitThenTimeout) {
  auto cfg = exampleConfig();
  std::vector<QueueEntry> q = {admit(chain("small", 5, 3, 100, 2.0), 24)};
  EXPECT_FALSE(formBatch(q, cfg, 2.0).has_value());
  EXPECT_FALSE(formBatch(q, cfg, 11.99).has_value());
  auto b = formBatch(q, cfg, 12.0);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->reason, FormationReason::Timeout);
  EXPECT_EQ(b->memberIds(), (std::vector<std::string>{"small"}));
}

TEST(BatchScheduler, AdmissionRejectsOversize) {
  EXPECT_THROW((void)admit(chain("big", 24, 1, 1), 24), AdmissionError);
  EXPECT_NO_THROW((void)admit(chain("ok", 23, 1, 1), 24));
}

TEST(BatchScheduler, BatchShotsExamples) {
  auto cfg = exampleConfig();
  auto q = exampleQueue();
  EXPECT_EQ(batchShots(std::vector{q[1], q[2]}, cfg), 60u);
  cfg.maxShots = 100;
  EXPECT_EQ(batchShots(std::vector{admit(chain("p", 1, 1, 500), 24)}, cfg), 100u);
  EXPECT_EQ(batchShots(std::vector{admit(chain("p", 1, 1, 1), 24)}, cfg), 1u);
}

TEST(BatchScheduler, SettleExamples) {
  auto cfg = exampleConfig();
  auto p2 = admit(chain("P2", 10, 10, 60), 24);
  auto p = admit(chain("P", 3, 2, 100), 24);
  auto b = batchOf({p2, p}, cfg);
  auto left = settleBatch(b, {p2, p});
  ASSERT_EQ(left.size(), 1u);
  EXPECT_EQ(left[0].id(), "P");
  EXPECT_EQ(left[0].remainingShots, 40u);

  Batch empty;
  auto same = settleBatch(empty, {p2, p});
  EXPECT_EQ(ids(same), (std::vector<std::string>{"P2", "P"}));
}

TEST(BatchScheduler, EmptyUtilityIsAbsent) {
  EXPECT_FALSE(spaceTimeUtility({}).has_value());
}

TEST(BatchScheduler, SingleUniformProcessUtility) {
  SchedulerConfig cfg = exampleConfig();
  auto b = batchOf({admit(chain("p", 20, 7, 9), 24)}, cfg);
  EXPECT_DOUBLE_EQ(*spaceTimeUtility(std::span(&b, 1)), 20.0 / 24.0);
}

// Drives the loop to completion on random queues and checks the batch
// invariants and shot conservation.
TEST(BatchScheduler, RandomQueuesKeepInvariants) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    SchedulerConfig cfg;
    cfg.totalQubits = 30;
    cfg.lambda = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    cfg.maxShots = 1 + rng() % 300;
    cfg.waitBound = 5.0;
    std::vector<QueueEntry> queue;
    std::map<std::string, std::uint64_t> owed, charged;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      auto id = "p" + std::to_string(i);
      auto shots = 1 + rng() % 1000;
      queue.push_back(admit(chain(id, 1 + rng() % 29, 1 + rng() % 20, shots,
                                  static_cast<double>(rng() % 10)),
                            cfg.totalQubits));
      owed[id] = shots;
    }
    double now = 0.0;
    int guard = 0;
    while (!queue.empty() && ++guard < 10000) {
      auto ordered = prioritize(queue);
      for (std::size_t i = 1; i < ordered.size(); ++i)
        ASSERT_LE(ordered[i - 1].totalDepthDemand(), ordered[i].totalDepthDemand());
      auto b = formBatch(ordered, cfg, now);
      if (!b) {
        now += 1.0;
        continue;
      }
      ASSERT_LT(b->footprint(), cfg.totalQubits);
      if (b->reason == FormationReason::Threshold)
        ASSERT_GE(static_cast<double>(b->footprint()),
                  cfg.lambda * static_cast<double>(cfg.totalQubits));
      std::uint64_t minRemaining = UINT64_MAX;
      for (const auto& m : b->members) minRemaining = std::min(minRemaining, m.remainingShots);
      ASSERT_EQ(b->shots, std::min(cfg.maxShots, minRemaining));
      for (const auto& m : b->members) charged[m.id()] += b->shots;
      queue = settleBatch(*b, queue);
    }
    ASSERT_TRUE(queue.empty());
    EXPECT_EQ(charged, owed);
  }
}
