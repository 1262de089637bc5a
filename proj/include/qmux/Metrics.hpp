#pragma once

#include "qmux/BatchScheduler.hpp"
#include "qmux/InstructionScheduler.hpp"
#include "qmux/SpaceManager.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace qmux {

/// Distinct physical qubits touched by member (non-SYSTEM) instructions,
/// divided by `totalQubits`.
[[nodiscard]] double batchUtilization(const ScheduledProgram& sp,
                                      std::size_t totalQubits);

/// Mean of batchUtilization over the batches; nothing for an empty list.
[[nodiscard]] std::optional<double>
spaceUtilization(std::span<const ScheduledProgram> programs,
                 std::size_t totalQubits);

struct ShareRatio {
  double value = 0.0;
  /// Set when the helper zone was empty and the ratio defaulted to 0.
  bool emptyHelperZone = false;
};

/// Fraction of helper-zone qubits bound by at least two distinct processes.
[[nodiscard]] ShareRatio shareRatio(const ScheduledProgram& sp);

using Distribution = std::map<std::string, double>;

class DistributionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// 1 - L1/2. Outcomes missing on one side count as probability 0; each side
/// must sum to 1 within 1e-9.
[[nodiscard]] double fidelityL1(const Distribution& ideal,
                                const Distribution& real);

/// HRCost / (Intro + HRCost); nothing when both are zero.
[[nodiscard]] std::optional<double> hrRatio(const CostBreakdown& cb);

/// Mean member count; nothing for an empty list.
[[nodiscard]] std::optional<double>
processesPerBatch(std::span<const std::size_t> memberCounts);

struct MetricsReport {
  std::optional<double> spaceUtilization;
  std::optional<double> shareRatio;
  std::optional<double> eta;
  std::optional<double> ppb;
  std::optional<double> hrRatio;
  std::optional<double> fidelity;
  std::size_t batches = 0;
};

} // namespace qmux
