#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qmux {

using PhysicalQubit = std::size_t;
using Edge = std::pair<PhysicalQubit, PhysicalQubit>;

class TopologyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/**
 * Undirected device coupling graph with an all-pairs hop-count table.
 *
 * The graph is immutable after construction. Construction rejects
 * self-loops, out-of-range endpoints and disconnected graphs, so every
 * distance lookup on a constructed graph is finite.
 */
class HardwareGraph {
public:
  HardwareGraph(std::size_t numQubits, std::vector<Edge> edges,
                std::string name = {});

  [[nodiscard]] std::size_t numQubits() const noexcept { return numQubits_; }
  /// Normalized (lo, hi) edges, sorted and deduplicated.
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept {
    return edges_;
  }
  [[nodiscard]] std::span<const PhysicalQubit>
  neighbors(PhysicalQubit q) const;
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// Shortest-path hop count. Throws std::out_of_range on a bad index.
  [[nodiscard]] std::uint32_t distance(PhysicalQubit a, PhysicalQubit b) const;
  [[nodiscard]] std::uint32_t
  distanceUnchecked(PhysicalQubit a, PhysicalQubit b) const noexcept {
    return dist_[a * numQubits_ + b];
  }
  [[nodiscard]] bool adjacent(PhysicalQubit a, PhysicalQubit b) const {
    return distance(a, b) == 1;
  }
  [[nodiscard]] std::uint32_t diameter() const noexcept;

private:
  std::size_t numQubits_;
  std::vector<Edge> edges_;
  std::vector<std::vector<PhysicalQubit>> adjacency_;
  std::vector<std::uint32_t> dist_;
  std::string name_;
};

/// Path 0-1-...-(n-1).
[[nodiscard]] HardwareGraph lineTopology(std::size_t n);

/// rows x cols square lattice, qubit (r, c) numbered r * cols + c.
[[nodiscard]] HardwareGraph gridTopology(std::size_t rows, std::size_t cols);

/**
 * Heavy-hex lattice: `rows` horizontal chains of `cols` qubits each. Adjacent
 * chains are joined through degree-2 bridge qubits placed every fourth column,
 * starting at column 0 below even chains and at column 2 below odd chains.
 * Chain qubits are numbered first (row-major), bridge qubits after them.
 * heavyhex(15, 7) yields 133 qubits.
 */
[[nodiscard]] HardwareGraph heavyHexTopology(std::size_t rows,
                                             std::size_t cols);

/// Parses `u v` lines (0-based, `#` comments). Qubit count = max index + 1.
[[nodiscard]] HardwareGraph parseEdgeList(std::istream& in,
                                          std::string name = "edgelist");
[[nodiscard]] std::string writeEdgeList(const HardwareGraph& g);

/**
 * Resolves a topology descriptor: `line(n)`, `grid(r,c)`, `heavyhex(r,c)`
 * (the `name:a,b` spelling is accepted too), or a path to an edge-list file
 * optionally prefixed by `file:`.
 */
[[nodiscard]] HardwareGraph loadTopology(std::string_view descriptor);

} // namespace qmux
