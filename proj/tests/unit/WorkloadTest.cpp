#include "qmux/Workload.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>

using namespace qmux;

namespace {

// Replays helper lifetimes: every FREE_HELPER closes exactly one open
// episode and every episode opened is eventually closed.
bool helpersFreedOncePerEpisode(const Process& p) {
  std::vector<bool> live(p.numHelper(), false);
  for (const auto& in : p.instructions()) {
    if (in.opcode == Opcode::FreeHelper) {
      auto s = in.operands[0].index;
      if (!live[s]) return false;
      live[s] = false;
      continue;
    }
    for (const auto& op : in.operands)
      if (op.kind == OperandKind::Helper) live[op.index] = true;
  }
  return std::none_of(live.begin(), live.end(), [](bool b) { return b; });
}

} // namespace

TEST(Workload, McxSizes) {
  auto m2 = generateFamily({Family::Mcx, {2}}, 0);
  EXPECT_EQ(m2.numData(), 3u);
  EXPECT_EQ(m2.numHelper(), 1u);
  auto m12 = generateFamily({Family::Mcx, {12}}, 0);
  EXPECT_EQ(m12.numData(), 13u);
  EXPECT_EQ(m12.numHelper(), 11u);
  EXPECT_THROW((void)generateFamily({Family::Mcx, {1}}, 0), ProcessError);
}

TEST(Workload, RandomSizes) {
  auto r = generateFamily({Family::Random, {4, 4, 15}}, 0);
  EXPECT_EQ(r.numData(), 4u);
  EXPECT_EQ(r.numHelper(), 4u);
  EXPECT_EQ(r.gateCount(), 15u);
}

TEST(Workload, FamiliesFreeHelpersOncePerEpisode) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (const auto& params :
         {FamilyParams{Family::Random, {5, 3, 30}}, FamilyParams{Family::Mcx, {5}},
          FamilyParams{Family::Stabilizer, {6, 3}},
          FamilyParams{Family::Arithmetic, {5, 3}}}) {
      auto p = generateFamily(params, seed);
      EXPECT_TRUE(helpersFreedOncePerEpisode(p)) << params.label();
      EXPECT_EQ(parseProcess(serializeProcess(p)), p);
    }
  }
}

TEST(Workload, StabilizerRoundsMeasureAndFree) {
  auto p = generateFamily({Family::Stabilizer, {4, 2}}, 0);
  std::size_t measures = 0, frees = 0;
  for (const auto& in : p.instructions()) {
    measures += in.opcode == Opcode::Measure && in.touchesHelper();
    frees += in.opcode == Opcode::FreeHelper;
    if (isTwoQubitGate(in.opcode)) EXPECT_TRUE(in.touchesHelper());
  }
  EXPECT_GT(measures, 0u);
  EXPECT_EQ(frees, measures);
}

TEST(Workload, PoissonMeanCount) {
  WorkloadSpec spec;
  spec.arrivalRate = 0.6;
  spec.duration = 40;
  double total = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    spec.seed = seed;
    total += static_cast<double>(generateWorkload(spec).size());
  }
  EXPECT_NEAR(total / 1000.0, 24.0, 1.0);
}

TEST(Workload, ShotBounds) {
  WorkloadSpec spec;
  spec.shotsMin = 500;
  spec.shotsMax = 8000;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    double last = 0;
    for (const auto& j : generateWorkload(spec)) {
      EXPECT_GE(j.process->shots(), 500u);
      EXPECT_LE(j.process->shots(), 8000u);
      EXPECT_GE(j.process->arrivalTime(), last);
      EXPECT_LT(j.process->arrivalTime(), spec.duration);
      last = j.process->arrivalTime();
    }
  }
  spec.shotsMin = spec.shotsMax = 1000;
  for (const auto& j : generateWorkload(spec)) EXPECT_EQ(j.process->shots(), 1000u);
}

TEST(Workload, Deterministic) {
  WorkloadSpec spec;
  spec.seed = 77;
  auto a = generateWorkload(spec);
  auto b = generateWorkload(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(serializeProcess(*a[i].process), serializeProcess(*b[i].process));
    EXPECT_EQ(a[i].params, b[i].params);
  }
}

TEST(Workload, SpecValidation) {
  WorkloadSpec spec;
  spec.arrivalRate = 0;
  EXPECT_ANY_THROW(spec.validate());
  spec = {};
  spec.shotsMin = 10;
  spec.shotsMax = 5;
  EXPECT_ANY_THROW(spec.validate());
  spec = {};
  spec.mix = {0, 0, 0, 0};
  EXPECT_ANY_THROW(spec.validate());
}

TEST(Workload, MixParsing) {
  EXPECT_EQ(parseMix("1,0,2,1"), (std::array<double, 4>{1, 0, 2, 1}));
  EXPECT_EQ(parseMix("mcx=1"), (std::array<double, 4>{0, 1, 0, 0}));
  EXPECT_ANY_THROW((void)parseMix("bogus=1"));
}

TEST(Workload, DirectoryRoundTrip) {
  WorkloadSpec spec;
  spec.seed = 5;
  auto jobs = generateWorkload(spec);
  auto dir = std::filesystem::temp_directory_path() / "qmux_workload_rt";
  std::filesystem::remove_all(dir);
  writeWorkload(dir, jobs, nlohmann::json::object());
  auto back = readWorkload(dir);
  ASSERT_EQ(back.size(), jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    EXPECT_EQ(*back[i].process, *jobs[i].process);
    EXPECT_EQ(back[i].params, jobs[i].params);
  }
  std::filesystem::remove_all(dir);
}
