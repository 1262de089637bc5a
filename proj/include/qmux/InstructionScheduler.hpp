#pragma once

#include "qmux/Process.hpp"
#include "qmux/SpaceManager.hpp"
#include "qmux/Topology.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qmux {

/// Owner tag of kernel-inserted instructions.
inline constexpr std::size_t kSystemOwner =
    std::numeric_limits<std::size_t>::max();

struct HardwareInstruction {
  std::size_t seq = 0;
  /// Index into ScheduledProgram::processIds, or kSystemOwner.
  std::size_t owner = kSystemOwner;
  Opcode opcode = Opcode::Reset;
  std::vector<PhysicalQubit> qubits;
  /// MEASURE target in the owner's own classical namespace.
  std::optional<std::size_t> classical;
  double angle = 0.0;

  [[nodiscard]] bool isSystem() const noexcept {
    return owner == kSystemOwner;
  }
  bool operator==(const HardwareInstruction&) const = default;
};

struct BindingEvent {
  enum class Kind : std::uint8_t { Bind, Release };

  /// Stream position: a bind precedes the instruction at `seq`, a release is
  /// the RESET at `seq`.
  std::size_t seq = 0;
  std::size_t owner = 0;
  std::size_t helper = 0;
  /// Per (owner, helper) allocation counter, starting at 0.
  std::size_t episode = 0;
  PhysicalQubit physical = 0;
  Kind kind = Kind::Bind;

  bool operator==(const BindingEvent&) const = default;
};

enum class HelperMode : std::uint8_t {
  /// Helpers are drawn on demand from the shared helper zone.
  Shared,
  /// Helper s_i lives on the process's reserved site q^d + i.
  Exclusive,
};

struct ScheduledProgram {
  std::vector<std::string> processIds;
  /// Physical data qubits per process.
  std::vector<std::vector<PhysicalQubit>> dataQubits;
  /// Qubits outside every data region.
  std::vector<PhysicalQubit> helperZone;
  std::vector<HardwareInstruction> instructions;
  std::vector<BindingEvent> bindingLog;
  std::vector<bool> completed;
  /// Members dropped by the deadlock policy, lowest priority first.
  std::vector<std::string> evicted;

  /// One `<seq> <owner> <OPCODE> <phys...>` line per instruction.
  [[nodiscard]] std::string toText() const;
  bool operator==(const ScheduledProgram&) const = default;
};

/**
 * Nearest free helper to `anchors`: minimizes the mean distance to the
 * anchor qubits, ties to the lowest index. Returns nothing if none is free.
 */
[[nodiscard]] std::optional<PhysicalQubit>
nearestFreeHelper(std::span<const PhysicalQubit> anchors,
                  std::span<const PhysicalQubit> helperZone,
                  const std::vector<bool>& isFree, const HardwareGraph& g);

/**
 * Round-robin devirtualization of one batch. `members` must be in batch
 * priority order and `layout` must hold one site list per member. Each turn
 * the current process emits its next instruction if it can: data-only
 * instructions translate through the layout, helper instructions first bind
 * the nearest free helper (or leave the process waiting when none is free),
 * and FREE_HELPER becomes a SYSTEM RESET that returns the helper. Helpers
 * still bound when a process finishes are reset and returned as well.
 *
 * Members whose peak helper demand exceeds the helper zone are evicted up
 * front. If every unfinished process waits with no release pending, the
 * lowest-priority unfinished member is evicted and scheduling restarts.
 */
[[nodiscard]] ScheduledProgram
scheduleInstructions(std::span<const ProcessPtr> members, const Layout& layout,
                     const HardwareGraph& g,
                     HelperMode mode = HelperMode::Shared);

struct IsolationReport {
  bool ok = true;
  std::string message;
  std::optional<PhysicalQubit> qubit;
  std::vector<std::size_t> positions;
};

/**
 * Independent check of a stream: exactly one SYSTEM RESET on a qubit between
 * consecutive helper episodes, no instruction mixing operands of two
 * processes, and disjoint data regions. Reports the first violation.
 */
[[nodiscard]] IsolationReport verifyIsolation(const ScheduledProgram& sp);

} // namespace qmux
