#pragma once

#include "qmux/BatchScheduler.hpp"
#include "qmux/InstructionScheduler.hpp"
#include "qmux/Metrics.hpp"
#include "qmux/SpaceManager.hpp"
#include "qmux/Workload.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qmux {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  std::string topology = "heavyhex(15,7)";
  /// totalQubits is overwritten with the topology size at run time.
  SchedulerConfig scheduler;
  CostWeights weights;
  /// The seed field is ignored; each batch derives its own from `seed`.
  AnnealParams anneal;
  /// Off gives every process a private helper region placed with its data.
  bool sharing = true;
  /// Off replaces the D_p priority with arrival order.
  bool shotAware = true;
  WorkloadSpec workload;
  /// When set, jobs are read from this directory instead of generated.
  std::string workloadDir;
  std::uint64_t seed = 1;
  /// Seconds per depth layer per shot.
  double depthTime = 1e-3;

  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

struct MemberRecord {
  std::string id;
  std::size_t numData = 0;
  std::size_t numHelper = 0;
  std::size_t depth = 0;
  double arrival = 0.0;
  /// Shots still owed when the batch started.
  std::uint64_t remainingBefore = 0;
};

/// Everything recorded about one executed batch.
struct BatchRecord {
  std::size_t index = 0;
  double startTime = 0.0;
  double endTime = 0.0;
  FormationReason reason = FormationReason::Threshold;
  std::uint64_t shots = 0;
  std::size_t totalQubits = 0;
  /// Members that actually ran, in priority order.
  std::vector<MemberRecord> members;
  /// Members dropped before or during instruction scheduling; they stay
  /// queued with their shots uncharged.
  std::vector<std::string> evicted;
  Layout layout;
  CostBreakdown cost;
  CostBreakdown initialCost;
  std::uint64_t annealSeed = 0;
  ScheduledProgram program;

  [[nodiscard]] std::size_t maxDepth() const;
  [[nodiscard]] std::uint64_t makespan() const;
  [[nodiscard]] std::uint64_t capacity() const;
  [[nodiscard]] std::uint64_t work() const;
};

/// Batch record without the instruction stream, which lives in a text file.
[[nodiscard]] nlohmann::json recordToJson(const BatchRecord& r);
/// Inverse of recordToJson plus the stream text written by toText().
[[nodiscard]] BatchRecord recordFromJson(const nlohmann::json& j,
                                         std::string_view stream);

/// Parses ScheduledProgram::toText() output; owners resolve against
/// `processIds`.
[[nodiscard]] std::vector<HardwareInstruction>
parseStream(std::string_view text, std::span<const std::string> processIds);

struct SkippedJob {
  std::string id;
  std::string reason;
};

struct SimulationResult {
  /// Resolved configuration, topology size included.
  RunConfig config;
  std::vector<Job> jobs;
  std::vector<BatchRecord> batches;
  std::vector<SkippedJob> skipped;
  /// Admission, eviction and deadlock notes in event order.
  std::vector<std::string> log;
  nlohmann::json report;
};

/// Aggregate metrics of a run; the only input is the records, so a report
/// rebuilt from a run directory is identical to the online one.
[[nodiscard]] MetricsReport
computeMetrics(std::span<const BatchRecord> batches);
[[nodiscard]] nlohmann::json makeReport(const RunConfig& config,
                                        std::span<const BatchRecord> batches);

struct PlannedBatch {
  Batch batch;
  double startTime = 0.0;
  double endTime = 0.0;
};

/**
 * Batch formation alone: the same admission, ordering, waiting and shot
 * settlement as simulate(), without placement or instruction scheduling.
 */
[[nodiscard]] std::vector<PlannedBatch>
planBatches(const RunConfig& config, std::vector<Job> jobs,
            std::vector<SkippedJob>* skipped = nullptr);

/// Runs the full pipeline on the configured workload.
[[nodiscard]] SimulationResult simulate(const RunConfig& config);
/// Runs the full pipeline on an explicit job list.
[[nodiscard]] SimulationResult simulate(const RunConfig& config,
                                        std::vector<Job> jobs);

/// Writes manifest.json, batches/NNN.json, streams/NNN.txt and report.json.
void writeRunDirectory(const SimulationResult& result,
                       const std::filesystem::path& dir);
[[nodiscard]] std::vector<BatchRecord>
readRunBatches(const std::filesystem::path& dir);
[[nodiscard]] nlohmann::json
reportFromRunDirectory(const std::filesystem::path& dir);
/// Re-runs a run directory from its manifest alone.
[[nodiscard]] SimulationResult
replayManifest(const std::filesystem::path& manifestPath);

/// One CSV row per batch: lambda, utilization, share ratio, members, eta,
/// hr ratio and makespan.
[[nodiscard]] std::string batchCsv(const RunConfig& config,
                                   std::span<const BatchRecord> batches);

struct SweepRow {
  double lambda = 0.0;
  bool sharing = true;
  bool shotAware = true;
  std::size_t batches = 0;
  MetricsReport metrics;
};

/**
 * One run per lambda and per (sharing, shotAware) combination, all on the
 * same workload and seed. Rows come back sorted by (lambda, sharing,
 * shotAware) regardless of completion order.
 */
[[nodiscard]] std::vector<SweepRow> ablationSweep(const RunConfig& base,
                                                  std::span<const double> lambdas);
[[nodiscard]] std::string sweepCsv(std::span<const SweepRow> rows);

} // namespace qmux
