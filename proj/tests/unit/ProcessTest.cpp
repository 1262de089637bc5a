#include "qmux/Process.hpp"
#include "qmux/Workload.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace qmux;

namespace {

const std::string kFixtures = QMUX_FIXTURES;

std::size_t errorLine(std::string_view text) {
  try {
    (void)parseProcess(text);
  } catch (const ProcessError& e) {
    return e.line();
  }
  return 0;
}

// Chain of `d` H gates on q0 with `n` data qubits: depth d, as in the
// scheduling example where only q^d, d and s matter.
Process chain(std::string id, std::size_t n, std::size_t d, std::uint64_t s) {
  std::vector<VirtualInstruction> ins(d, {Opcode::H, {data(0)}});
  return {std::move(id), n, 0, s, ins};
}

} // namespace

TEST(Process, MinimalProcess) {
  auto p = parseProcess("proc a\ndata 1\nshots 1\nH q0\nMEASURE q0 c0\n");
  EXPECT_EQ(p.numData(), 1u);
  EXPECT_EQ(p.numHelper(), 0u);
  EXPECT_EQ(p.depth(), 2u);
  EXPECT_EQ(p.numClassical(), 1u);
}

TEST(Process, DepthExamples) {
  auto depthOf = [](std::string body) {
    return parseProcess("proc d\nshots 1\ndata 3\n" + body).depth();
  };
  EXPECT_EQ(depthOf("H q0\n"), 1u);
  EXPECT_EQ(depthOf("H q0\nCX q0 q1\nCX q1 q2\n"), 3u);
  EXPECT_EQ(depthOf("H q0\nX q1\n"), 1u);
  EXPECT_EQ(depthOf("H q0\nH q0\nX q1\n"), 2u);
}

TEST(Process, FreeHelperAddsNoDepth) {
  auto p = parseProcess("proc f\nshots 1\ndata 2\nhelper 1\n"
                        "CX q0 s0\nFREE_HELPER s0\nCX q1 s0\n");
  // s0 is a fresh allocation after FREE_HELPER, so the second CX does not
  // depend on the first.
  EXPECT_EQ(p.depth(), 1u);
  EXPECT_EQ(p.peakHelperDemand(), 1u);
}

TEST(Process, SharedPairProcesses) {
  auto p1 = loadProcess(kFixtures + "/pair_p1.proc");
  EXPECT_EQ(p1.id(), "P1");
  EXPECT_EQ(p1.numData(), 3u);
  EXPECT_EQ(p1.numHelper(), 3u);
  EXPECT_EQ(p1.shots(), 1000u);
  auto p2 = loadProcess(kFixtures + "/pair_p2.proc");
  EXPECT_EQ(p2.numData(), 3u);
  EXPECT_EQ(p2.numHelper(), 3u);
  EXPECT_EQ(p2.peakHelperDemand(), 2u);
}

TEST(Process, HelperOutOfRangeReportsLine) {
  EXPECT_EQ(errorLine("proc x\nshots 1\ndata 2\nhelper 3\nH q0\nCX q0 s5\n"), 6u);
}

TEST(Process, MissingHeaderAndUnknownOpcode) {
  EXPECT_THROW((void)loadProcess(kFixtures + "/bad_missing_header.proc"),
               ProcessError);
  EXPECT_GT(errorLine("proc x\ndata 2\nH q0\n"), 0u);
  EXPECT_EQ(errorLine("proc x\nshots 1\ndata 2\nH q0\nCCX q0 q1\n"), 5u);
  EXPECT_EQ(errorLine("proc x\nshots 1\ndata 2\nCX q0 q0\n"), 4u);
  EXPECT_EQ(errorLine("proc x\nshots 1\ndata 2\nMEASURE q0\n"), 4u);
  EXPECT_EQ(errorLine("proc x\nshots 1\ndata 2\nFREE_HELPER q0\n"), 4u);
}

TEST(Process, FreeBeforeUseRejected) {
  EXPECT_EQ(errorLine("proc x\nshots 1\ndata 1\nhelper 1\nFREE_HELPER s0\n"),
            5u);
}

TEST(Process, MidCircuitDataReleaseRejected) {
  EXPECT_GT(errorLine("proc x\nshots 1\ndata 1\nH q0\nFREE_DATA q0\n"), 0u);
}

TEST(Process, StatsFromSchedulingExample) {
  auto p2 = chain("P2", 10, 10, 60);
  EXPECT_EQ(p2.depth(), 10u);
  EXPECT_EQ(p2.stats().totalDepthDemand, 600u);
  EXPECT_EQ(p2.stats().workVolume, 6000u);
  auto p3 = chain("P3", 12, 12, 60);
  EXPECT_EQ(p3.stats().totalDepthDemand, 720u);
  EXPECT_EQ(p3.stats().workVolume, 8640u);
  EXPECT_EQ(p3.stats().workVolume,
            p3.numData() * p3.stats().totalDepthDemand);
}

TEST(Process, ZeroShotsRejected) {
  EXPECT_THROW(chain("Z", 1, 1, 0), ProcessError);
  EXPECT_THROW((void)parseProcess("proc z\nshots 0\ndata 1\nH q0\n"),
               ProcessError);
}

TEST(Process, RoundTripIsIdentity) {
  for (auto name : {"pair_p1.proc", "pair_p2.proc"}) {
    auto p = loadProcess(kFixtures + "/" + name);
    auto text = serializeProcess(p);
    auto q = parseProcess(text);
    EXPECT_EQ(p, q);
    EXPECT_EQ(serializeProcess(q), text);
  }
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto f = kAllFamilies[seed % kAllFamilies.size()];
    FamilyParams params{f, {}};
    switch (f) {
    case Family::Random: params.args = {4, 3, 20}; break;
    case Family::Mcx: params.args = {4}; break;
    case Family::Stabilizer: params.args = {5, 2}; break;
    case Family::Arithmetic: params.args = {4, 2}; break;
    }
    auto p = generateFamily(params, seed, "g" + std::to_string(seed), 100 + seed,
                            0.25 * static_cast<double>(seed));
    EXPECT_EQ(parseProcess(serializeProcess(p)), p) << params.label();
  }
}

TEST(Process, RzAngleSurvivesRoundTrip) {
  auto p = parseProcess("proc r\nshots 3\ndata 1\nRZ(0.1) q0\nRZ(-3.14159265358979) q0\n");
  EXPECT_EQ(parseProcess(serializeProcess(p)), p);
  EXPECT_DOUBLE_EQ(p.instructions()[0].angle, 0.1);
}

// Swapping adjacent instructions with no shared operand must not change depth.
TEST(Process, DepthInvariantUnderCommutingSwaps) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = generateFamily({Family::Random, {5, 0, 25}}, trial);
    std::vector<VirtualInstruction> ins(p.instructions().begin(),
                                        p.instructions().end());
    const auto base = computeDepth(ins);
    for (int k = 0; k < 200; ++k) {
      std::uniform_int_distribution<std::size_t> pick(0, ins.size() - 2);
      auto i = pick(rng);
      bool shared = false;
      for (const auto& a : ins[i].operands)
        for (const auto& b : ins[i + 1].operands)
          shared = shared || (a.isQubit() && a == b);
      if (!shared) std::swap(ins[i], ins[i + 1]);
    }
    EXPECT_EQ(computeDepth(ins), base);
  }
}
