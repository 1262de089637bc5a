#pragma once

#include "qmux/Process.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmux {

/// How far the greedy scan fills a batch once the occupancy threshold holds.
enum class BatchFill : std::uint8_t {
  /// Stop adding processes once the data-qubit sum reaches lambda * Q_tot.
  UntilThreshold,
  /// Keep adding every process that still fits below Q_tot.
  UntilCapacity,
};

struct SchedulerConfig {
  /// Data-qubit occupancy ratio lambda, in (0, 1).
  double lambda = 0.6;
  /// S_max, the most shots any batch executes.
  std::uint64_t maxShots = 8192;
  /// Seconds the oldest waiting process may wait before an under-threshold
  /// batch is formed anyway.
  double waitBound = 10.0;
  /// Q_tot, taken from the hardware graph.
  std::size_t totalQubits = 0;
  BatchFill fill = BatchFill::UntilThreshold;

  void validate() const;
};

class AdmissionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A waiting process and its scheduling state.
struct QueueEntry {
  ProcessPtr process;
  std::uint64_t remainingShots = 0;
  /// Qubits the batcher reserves for this process: q^d, or q^d + q^h when
  /// helpers are not shared.
  std::size_t footprint = 0;

  [[nodiscard]] const std::string& id() const { return process->id(); }
  [[nodiscard]] double arrival() const { return process->arrivalTime(); }
  [[nodiscard]] std::size_t depth() const { return process->depth(); }
  [[nodiscard]] std::size_t numData() const { return process->numData(); }
  /// D_p over the remaining shots.
  [[nodiscard]] std::uint64_t totalDepthDemand() const {
    return remainingShots * depth();
  }
};

/// Builds a queue entry with all shots pending. Throws AdmissionError when
/// the footprint can never fit below `totalQubits`.
[[nodiscard]] QueueEntry admit(ProcessPtr process, std::size_t totalQubits,
                               bool shareHelpers = true);

enum class FormationReason : std::uint8_t { Threshold, Timeout };

[[nodiscard]] std::string_view reasonName(FormationReason r) noexcept;

struct Batch {
  std::vector<QueueEntry> members;
  /// s_B
  std::uint64_t shots = 0;
  FormationReason reason = FormationReason::Threshold;
  std::size_t totalQubits = 0;

  [[nodiscard]] std::size_t maxDepth() const;
  /// D_B = s_B * max d_p
  [[nodiscard]] std::uint64_t makespan() const;
  /// Cap_B = Q_tot * D_B
  [[nodiscard]] std::uint64_t capacity() const;
  /// Work_B = s_B * sum q_p^d d_p
  [[nodiscard]] std::uint64_t work() const;
  [[nodiscard]] std::size_t footprint() const;
  [[nodiscard]] std::vector<std::string> memberIds() const;
};

/// Ascending D_p; ties by earlier arrival, then by id.
[[nodiscard]] std::vector<QueueEntry> prioritize(std::vector<QueueEntry> queue);
/// Arrival order (the shot-unaware baseline); ties by id.
[[nodiscard]] std::vector<QueueEntry>
arrivalOrder(std::vector<QueueEntry> queue);

/**
 * Greedy first-fit-skip scan over `ordered`: a process joins while the
 * footprint sum stays below Q_tot. Returns a batch once the sum reaches
 * lambda * Q_tot; otherwise returns nothing (wait) unless the oldest waiting
 * process has waited `waitBound` seconds, in which case the under-threshold
 * batch is returned with reason Timeout.
 */
[[nodiscard]] std::optional<Batch> formBatch(std::span<const QueueEntry> ordered,
                                             const SchedulerConfig& cfg,
                                             double now);

/// s_B = min(S_max, min remaining s_p).
[[nodiscard]] std::uint64_t batchShots(std::span<const QueueEntry> members,
                                       const SchedulerConfig& cfg);

/// Charges s_B to each member; members with no shots left leave the queue.
[[nodiscard]] std::vector<QueueEntry> settleBatch(const Batch& batch,
                                                  std::vector<QueueEntry> queue);

/// eta = sum Work_k / sum Cap_k; nothing for an empty list.
[[nodiscard]] std::optional<double>
spaceTimeUtility(std::span<const Batch> batches);

} // namespace qmux
