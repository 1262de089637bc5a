#include "qmux/Metrics.hpp"
#include "qmux/Workload.hpp"

#include <gtest/gtest.h>

#include <memory>
#include <random>

using namespace qmux;

namespace {

const std::string kFixtures = QMUX_FIXTURES;

ScheduledProgram sharedPairProgram() {
  std::vector<ProcessPtr> members{
      std::make_shared<const Process>(loadProcess(kFixtures + "/pair_p1.proc")),
      std::make_shared<const Process>(loadProcess(kFixtures + "/pair_p2.proc"))};
  return scheduleInstructions(members, Layout(10, {{0, 1, 5}, {3, 8, 7}}),
                              gridTopology(2, 5));
}

Distribution randomDistribution(std::mt19937_64& rng) {
  Distribution d;
  double sum = 0;
  for (int i = 0; i < 8; ++i) {
    if (rng() % 2) continue;
    double w = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    d[std::to_string(i)] = w;
    sum += w;
  }
  if (sum == 0) return {{"0", 1.0}};
  for (auto& [k, v] : d) v /= sum;
  return d;
}

} // namespace

TEST(Metrics, SharedPairShareAndUtilization) {
  auto sp = sharedPairProgram();
  auto sr = shareRatio(sp);
  EXPECT_DOUBLE_EQ(sr.value, 0.25);
  EXPECT_FALSE(sr.emptyHelperZone);
  EXPECT_GT(batchUtilization(sp, 10), 0.6);
  EXPECT_DOUBLE_EQ(batchUtilization(sp, 10), 0.9);
}

TEST(Metrics, SpaceUtilizationExamples) {
  EXPECT_FALSE(spaceUtilization({}, 10).has_value());
  auto p = std::make_shared<const Process>(
      parseProcess("proc all\nshots 1\ndata 3\nCX q0 q1\nCX q1 q2\n"));
  std::vector<ProcessPtr> members{p};
  std::vector<ScheduledProgram> progs{
      scheduleInstructions(members, Layout(3, {{0, 1, 2}}), lineTopology(3))};
  EXPECT_DOUBLE_EQ(*spaceUtilization(progs, 3), 1.0);
}

TEST(Metrics, ShareRatioEdgeCases) {
  ScheduledProgram empty;
  auto sr = shareRatio(empty);
  EXPECT_EQ(sr.value, 0.0);
  EXPECT_TRUE(sr.emptyHelperZone);

  ScheduledProgram all;
  all.processIds = {"a", "b"};
  all.helperZone = {4, 5};
  for (PhysicalQubit q : {4, 5})
    for (std::size_t owner : {0, 1})
      all.bindingLog.push_back({0, owner, 0, 0, q, BindingEvent::Kind::Bind});
  EXPECT_DOUBLE_EQ(shareRatio(all).value, 1.0);
}

TEST(Metrics, ShareRatioMonotoneUnderExtraBindings) {
  auto sp = sharedPairProgram();
  std::mt19937_64 rng(1);
  double prev = shareRatio(sp).value;
  for (int i = 0; i < 20; ++i) {
    auto q = sp.helperZone[rng() % sp.helperZone.size()];
    sp.bindingLog.push_back({sp.instructions.size(), rng() % 2, 0, 9, q,
                             BindingEvent::Kind::Bind});
    double now = shareRatio(sp).value;
    EXPECT_GE(now, prev);
    prev = now;
  }
}

TEST(Metrics, FidelityExamples) {
  Distribution a{{"00", 0.5}, {"11", 0.5}};
  EXPECT_DOUBLE_EQ(fidelityL1(a, a), 1.0);
  EXPECT_DOUBLE_EQ(fidelityL1({{"00", 1.0}}, {{"11", 1.0}}), 0.0);
  EXPECT_NEAR(fidelityL1({{"00", 1.0}}, {{"00", 0.9}, {"11", 0.1}}), 0.9, 1e-12);
}

TEST(Metrics, FidelityRejectsBadInput) {
  EXPECT_THROW((void)fidelityL1({{"0", 0.5}}, {{"0", 1.0}}), DistributionError);
  EXPECT_THROW((void)fidelityL1({{"0", 1.5}, {"1", -0.5}}, {{"0", 1.0}}),
               DistributionError);
}

TEST(Metrics, FidelitySymmetricAndIdentityOnlyWhenEqual) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1000; ++i) {
    auto a = randomDistribution(rng);
    auto b = randomDistribution(rng);
    double ab = fidelityL1(a, b);
    EXPECT_EQ(ab, fidelityL1(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    if (ab == 1.0) EXPECT_EQ(a, b);
  }
}

TEST(Metrics, HrRatioExamples) {
  EXPECT_DOUBLE_EQ(*hrRatio({0, 0, 5, 0}), 1.0);
  EXPECT_DOUBLE_EQ(*hrRatio({4, 0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(*hrRatio({3, 0, 1, 0}), 0.25);
  EXPECT_FALSE(hrRatio({0, 7, 0, 0}).has_value());
}

TEST(Metrics, StabilizerBatchHasFullHrRatio) {
  // Every two-qubit gate of a stabilizer process touches a helper, so Intro
  // vanishes and any helper routing cost gives a ratio of exactly 1.
  auto g = lineTopology(8);
  std::vector demands{placementDemand(generateFamily({Family::Stabilizer, {5, 2}}, 3, "qec"))};
  Layout far(8, {{0, 1, 2, 3, 4}});
  auto cb = totalCost(far, g, demands, CostWeights{});
  EXPECT_EQ(cb.intro, 0.0);
  ASSERT_GT(cb.hrcost, 0.0);
  EXPECT_DOUBLE_EQ(*hrRatio(cb), 1.0);

  auto hh = heavyHexTopology(3, 7);
  std::vector<PlacementDemand> batch;
  for (int i = 0; i < 3; ++i)
    batch.push_back(placementDemand(
        generateFamily({Family::Stabilizer, {5, 2}}, i, "qec" + std::to_string(i))));
  AnnealParams params;
  auto r = anneal(hh, batch, CostWeights{}, params);
  EXPECT_EQ(r.cost.intro, 0.0);
  EXPECT_EQ(r.initialCost.intro, 0.0);
}

TEST(Metrics, ProcessesPerBatch) {
  EXPECT_FALSE(processesPerBatch({}).has_value());
  std::vector<std::size_t> sizes{2, 4};
  EXPECT_DOUBLE_EQ(*processesPerBatch(sizes), 3.0);
  std::vector<std::size_t> ones(5, 1);
  EXPECT_DOUBLE_EQ(*processesPerBatch(ones), 1.0);
  std::vector<std::size_t> pair{2};
  EXPECT_DOUBLE_EQ(*processesPerBatch(pair), 2.0);
}
