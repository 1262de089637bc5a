#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qmux {

/// Virtual instruction set. `Reset` is hardware-only and never parsed.
enum class Opcode : std::uint8_t {
  H,
  X,
  Y,
  Z,
  S,
  T,
  RZ,
  CX,
  CZ,
  SWAP,
  Measure,
  FreeHelper,
  Reset,
};

[[nodiscard]] std::string_view opcodeName(Opcode op) noexcept;
/// Looks up a process-level opcode by its (case-insensitive) name.
[[nodiscard]] std::optional<Opcode> opcodeFromName(std::string_view name);
[[nodiscard]] bool isTwoQubitGate(Opcode op) noexcept;
[[nodiscard]] bool isSingleQubitGate(Opcode op) noexcept;

enum class OperandKind : std::uint8_t { Data, Helper, Classical };

struct VirtualOperand {
  OperandKind kind;
  std::size_t index;

  [[nodiscard]] bool isQubit() const noexcept {
    return kind != OperandKind::Classical;
  }
  [[nodiscard]] std::string toString() const;
  auto operator<=>(const VirtualOperand&) const = default;
};

[[nodiscard]] inline VirtualOperand data(std::size_t i) {
  return {OperandKind::Data, i};
}
[[nodiscard]] inline VirtualOperand helper(std::size_t i) {
  return {OperandKind::Helper, i};
}
[[nodiscard]] inline VirtualOperand classical(std::size_t i) {
  return {OperandKind::Classical, i};
}

struct VirtualInstruction {
  Opcode opcode;
  std::vector<VirtualOperand> operands;
  /// Rotation angle, only meaningful for RZ.
  double angle = 0.0;

  [[nodiscard]] bool touchesHelper() const noexcept;
  [[nodiscard]] std::string toString() const;
  bool operator==(const VirtualInstruction&) const = default;
};

/// Raised for malformed process text or an invalid instruction list.
/// `line()` is 1-based for parse errors, 0 otherwise.
class ProcessError : public std::runtime_error {
public:
  ProcessError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

struct ProcessStats {
  /// D_p = s_p * d_p
  std::uint64_t totalDepthDemand;
  /// W_p = q_p^d * d_p * s_p
  std::uint64_t workVolume;
};

/**
 * A validated virtual program together with its resource declarations.
 *
 * Helper lifetimes follow an episode model: the first use of `s_i` opens an
 * episode, `FREE_HELPER s_i` closes it, and a later use opens a new one.
 * Helpers still live at the end of the program are released implicitly.
 */
class Process {
public:
  Process(std::string id, std::size_t numData, std::size_t numHelper,
          std::uint64_t shots, std::vector<VirtualInstruction> instructions,
          double arrivalTime = 0.0);

  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] std::size_t numData() const noexcept { return numData_; }
  [[nodiscard]] std::size_t numHelper() const noexcept { return numHelper_; }
  /// Implied by the largest classical index used.
  [[nodiscard]] std::size_t numClassical() const noexcept {
    return numClassical_;
  }
  [[nodiscard]] std::uint64_t shots() const noexcept { return shots_; }
  [[nodiscard]] double arrivalTime() const noexcept { return arrivalTime_; }
  [[nodiscard]] std::size_t depth() const noexcept { return depth_; }
  [[nodiscard]] std::span<const VirtualInstruction>
  instructions() const noexcept {
    return instructions_;
  }
  /// Largest number of simultaneously live helper episodes.
  [[nodiscard]] std::size_t peakHelperDemand() const noexcept {
    return peakHelpers_;
  }
  /// Gate instructions, i.e. everything except MEASURE and FREE_HELPER.
  [[nodiscard]] std::size_t gateCount() const noexcept;
  [[nodiscard]] ProcessStats stats() const noexcept;

  [[nodiscard]] Process withShots(std::uint64_t shots) const;
  [[nodiscard]] Process withArrival(double arrivalTime) const;

  bool operator==(const Process&) const = default;

private:
  std::string id_;
  std::size_t numData_;
  std::size_t numHelper_;
  std::size_t numClassical_ = 0;
  std::uint64_t shots_;
  std::vector<VirtualInstruction> instructions_;
  double arrivalTime_;
  std::size_t depth_ = 0;
  std::size_t peakHelpers_ = 0;
};

using ProcessPtr = std::shared_ptr<const Process>;

/**
 * Unit-latency layered depth: each instruction sits one layer after the
 * latest instruction sharing any operand with it. MEASURE is one layer,
 * FREE_HELPER adds none and detaches the helper name from its history.
 */
[[nodiscard]] std::size_t
computeDepth(std::span<const VirtualInstruction> instructions);

/// Parses the line-oriented process format. Errors carry the line number.
[[nodiscard]] Process parseProcess(std::string_view text);
[[nodiscard]] Process loadProcess(const std::string& path);
/// Canonical text form; parseProcess(serializeProcess(p)) == p.
[[nodiscard]] std::string serializeProcess(const Process& p);

} // namespace qmux
