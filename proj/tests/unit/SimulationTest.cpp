#include "qmux/Simulation.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>

using namespace qmux;

namespace {

Job chainJob(std::string id, std::size_t n, std::size_t d, std::uint64_t s,
             double arrival) {
  std::vector<VirtualInstruction> ins(d, {Opcode::H, {data(0)}});
  return {std::make_shared<const Process>(std::move(id), n, 0, s, ins, arrival),
          {Family::Random, {n, 0, d}}};
}

std::vector<Job> exampleJobs() {
  return {chainJob("P1", 8, 100, 100, 0.0), chainJob("P2", 10, 10, 60, 0.0),
          chainJob("P3", 12, 12, 60, 0.0), chainJob("P4", 12, 80, 100, 0.0)};
}

RunConfig exampleConfig() {
  RunConfig c;
  c.topology = "grid(4,6)";
  c.scheduler.lambda = 0.6;
  c.scheduler.maxShots = 100000;
  c.anneal.iterations = 5;
  return c;
}

RunConfig smallRun() {
  RunConfig c;
  c.topology = "heavyhex(3,7)";
  c.workload.duration = 15;
  c.workload.dataMax = 6;
  c.workload.helperMax = 3;
  c.anneal.iterations = 5;
  c.anneal.movesPerIteration = 50;
  c.seed = 3;
  c.workload.seed = 3;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST(Simulation, ExampleQueueShotAware) {
  auto r = simulate(exampleConfig(), exampleJobs());
  ASSERT_FALSE(r.batches.empty());
  const auto& first = r.batches[0];
  ASSERT_EQ(first.members.size(), 2u);
  EXPECT_EQ(first.members[0].id, "P2");
  EXPECT_EQ(first.members[1].id, "P3");
  EXPECT_EQ(first.shots, 60u);
  EXPECT_EQ(first.work(), 14640u);
  EXPECT_EQ(first.capacity(), 17280u);
}

TEST(Simulation, ExampleQueueFifo) {
  auto c = exampleConfig();
  c.shotAware = false;
  auto r = simulate(c, exampleJobs());
  const auto& first = r.batches.at(0);
  ASSERT_EQ(first.members.size(), 2u);
  EXPECT_EQ(first.members[0].id, "P1");
  EXPECT_EQ(first.members[1].id, "P2");
  EXPECT_DOUBLE_EQ(static_cast<double>(first.work()) /
                       static_cast<double>(first.capacity()),
                   0.375);
}

TEST(Simulation, PlanMatchesSimulationWithoutEvictions) {
  auto c = exampleConfig();
  auto plan = planBatches(c, exampleJobs());
  auto run = simulate(c, exampleJobs());
  ASSERT_EQ(plan.size(), run.batches.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    EXPECT_EQ(plan[i].batch.shots, run.batches[i].shots);
    EXPECT_EQ(plan[i].batch.memberIds().size(), run.batches[i].members.size());
  }
}

TEST(Simulation, ShotConservationAndCompletion) {
  auto c = smallRun();
  auto r = simulate(c);
  std::map<std::string, std::uint64_t> charged;
  for (const auto& b : r.batches)
    for (const auto& m : b.members) charged[m.id] += b.shots;
  std::set<std::string> skipped;
  for (const auto& s : r.skipped) skipped.insert(s.id);
  for (const auto& j : r.jobs) {
    if (skipped.contains(j.process->id())) continue;
    EXPECT_EQ(charged[j.process->id()], j.process->shots()) << j.process->id();
  }
  for (const auto& b : r.batches) {
    EXPECT_TRUE(verifyIsolation(b.program).ok);
    EXPECT_NO_THROW(b.layout.validate());
    EXPECT_LE(b.startTime, b.endTime);
  }
}

TEST(Simulation, SharingOffNeverShares) {
  auto c = smallRun();
  c.sharing = false;
  auto r = simulate(c);
  ASSERT_FALSE(r.batches.empty());
  for (const auto& b : r.batches) {
    EXPECT_EQ(shareRatio(b.program).value, 0.0);
    EXPECT_NO_THROW(b.layout.validate());
  }
  EXPECT_EQ(*computeMetrics(r.batches).shareRatio, 0.0);
}

TEST(Simulation, ReplayAndReportFromDirectory) {
  auto c = smallRun();
  auto r = simulate(c);
  auto dir = std::filesystem::temp_directory_path() / "qmux_sim_replay";
  auto dir2 = std::filesystem::temp_directory_path() / "qmux_sim_replay2";
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
  writeRunDirectory(r, dir);
  EXPECT_EQ(reportFromRunDirectory(dir), r.report);
  EXPECT_EQ(reportFromRunDirectory(dir).dump(2) + "\n", slurp(dir / "report.json"));

  auto batches = readRunBatches(dir);
  ASSERT_EQ(batches.size(), r.batches.size());
  for (std::size_t i = 0; i < batches.size(); ++i) {
    EXPECT_EQ(batches[i].program.instructions, r.batches[i].program.instructions);
    EXPECT_EQ(batches[i].program.bindingLog, r.batches[i].program.bindingLog);
    EXPECT_EQ(batches[i].layout, r.batches[i].layout);
  }

  auto again = replayManifest(dir / "manifest.json");
  writeRunDirectory(again, dir2);
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto rel = std::filesystem::relative(e.path(), dir);
    EXPECT_EQ(slurp(e.path()), slurp(dir2 / rel)) << rel;
  }
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST(Simulation, StreamTextRoundTrip) {
  auto r = simulate(smallRun());
  for (const auto& b : r.batches) {
    auto parsed = parseStream(b.program.toText(), b.program.processIds);
    EXPECT_EQ(parsed, b.program.instructions);
  }
}

TEST(Simulation, OversizedJobIsSkipped) {
  auto c = exampleConfig();
  auto jobs = exampleJobs();
  jobs.push_back(chainJob("huge", 24, 3, 10, 0.0));
  auto r = simulate(c, jobs);
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].id, "huge");
}

TEST(Simulation, ConfigJsonRoundTrip) {
  auto c = smallRun();
  c.shotAware = false;
  c.scheduler.fill = BatchFill::UntilCapacity;
  nlohmann::json j = c;
  auto back = j.get<RunConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  c.scheduler.lambda = 1.0;
  EXPECT_ANY_THROW(c.validate());
}

TEST(Simulation, SweepHasOneRowPerCombination) {
  auto c = smallRun();
  c.workload.duration = 8;
  std::vector<double> lambdas{0.2, 0.6};
  auto rows = ablationSweep(c, lambdas);
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& row : rows)
    if (!row.sharing) EXPECT_EQ(row.metrics.shareRatio.value_or(0.0), 0.0);
  auto csv = sweepCsv(rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
}
