#pragma once

#include "qmux/Process.hpp"
#include "qmux/Topology.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmux {

class LayoutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Weights of the layout cost alpha * Intro - beta * Inter + gamma * HRCost.
struct CostWeights {
  double alpha = 0.5;
  double beta = 0.3;
  double gamma = 1.0;

  void validate() const;
  [[nodiscard]] CostWeights scaled(double c) const {
    return {alpha * c, beta * c, gamma * c};
  }
};

struct CostBreakdown {
  double intro = 0.0;
  double inter = 0.0;
  double hrcost = 0.0;
  double total = 0.0;
};

/**
 * What the placer needs to know about one process: how many physical sites
 * to reserve, which site pairs interact through two-qubit gates, and how
 * often each site talks to a helper.
 */
struct PlacementDemand {
  struct Pair {
    std::size_t a;
    std::size_t b;
    std::size_t count;
  };

  std::string id;
  std::size_t sites = 0;
  std::vector<Pair> pairs;
  /// Number of two-qubit gates pairing site i with a shared helper.
  std::vector<std::size_t> helperGates;

  [[nodiscard]] bool usesHelpers() const noexcept;
};

/**
 * Extracts the placement demand of `p`. With `reserveHelpers` each helper
 * s_i becomes a private site q^d + i, so helper gates count as intra-process
 * pairs and nothing is drawn from the shared helper zone.
 */
[[nodiscard]] PlacementDemand placementDemand(const Process& p,
                                              bool reserveHelpers = false);

/**
 * Static assignment of every process site to a physical qubit. All sites are
 * pairwise distinct; the remaining qubits form the helper zone.
 */
class Layout {
public:
  Layout() = default;
  Layout(std::size_t numQubits, std::vector<std::vector<PhysicalQubit>> sites);

  [[nodiscard]] std::size_t numQubits() const noexcept { return numQubits_; }
  [[nodiscard]] std::size_t numProcesses() const noexcept {
    return sites_.size();
  }
  [[nodiscard]] std::span<const PhysicalQubit> sites(std::size_t p) const {
    return sites_.at(p);
  }
  [[nodiscard]] const std::vector<std::vector<PhysicalQubit>>&
  allSites() const noexcept {
    return sites_;
  }
  [[nodiscard]] PhysicalQubit at(std::size_t p, std::size_t i) const {
    return sites_.at(p).at(i);
  }
  /// Sorted physical qubits not assigned to any site.
  [[nodiscard]] std::vector<PhysicalQubit> helperZone() const;

  void swapSites(std::size_t p, std::size_t i, std::size_t j);
  void moveSite(std::size_t p, std::size_t i, PhysicalQubit to);

  /// Throws LayoutError unless sites are in range and pairwise distinct.
  void validate() const;

  bool operator==(const Layout&) const = default;

private:
  std::size_t numQubits_ = 0;
  std::vector<std::vector<PhysicalQubit>> sites_;
};

/// Sum over same-process two-qubit gates of max(0, dist - 1).
[[nodiscard]] double introCost(const Layout& layout, const HardwareGraph& g,
                               std::span<const PlacementDemand> demands);
/// Mean over process pairs of the mean cross-pair distance; 0 for < 2
/// processes.
[[nodiscard]] double interCost(const Layout& layout, const HardwareGraph& g,
                               std::span<const PlacementDemand> demands);
/// Sum over sites of helperGates * max(0, dist to nearest helper-zone qubit -
/// 1). Throws LayoutError if helpers are needed but the zone is empty.
[[nodiscard]] double hrCost(const Layout& layout, const HardwareGraph& g,
                            std::span<const PlacementDemand> demands);
[[nodiscard]] CostBreakdown totalCost(const Layout& layout,
                                      const HardwareGraph& g,
                                      std::span<const PlacementDemand> demands,
                                      const CostWeights& w);

/**
 * Greedy clustered placement: processes in descending size order, each
 * grown by BFS over free qubits from the free seed qubit farthest from all
 * previously placed clusters (the first from a peripheral qubit). Ties are
 * broken with `seed`.
 */
[[nodiscard]] Layout initialLayout(const HardwareGraph& g,
                                   std::span<const PlacementDemand> demands,
                                   std::uint64_t seed);

struct AnnealParams {
  /// Outer (cooling) iterations.
  std::size_t iterations = 30;
  /// Proposals per outer iteration; 0 means 100 x total sites.
  std::size_t movesPerIteration = 0;
  /// Starting temperature; <= 0 calibrates it so that about half of the
  /// uphill proposals from the initial layout would be accepted.
  double initialTemperature = 0.0;
  double cooling = 0.95;
  std::uint64_t seed = 0;
  /// Independent runs with seeds seed, seed + 1, ...; the cheapest wins.
  std::size_t restarts = 1;
};

struct TracePoint {
  std::size_t iteration;
  double temperature;
  double current;
  double best;
  std::size_t accepted;
};

struct AnnealResult {
  Layout layout;
  CostBreakdown cost;
  Layout initial;
  CostBreakdown initialCost;
  std::vector<TracePoint> trace;
  double initialTemperature = 0.0;
  std::uint64_t seed = 0;
};

/**
 * Simulated annealing from initialLayout(). Proposals pick uniformly between
 * swapping two sites of one process and moving one site onto an adjacent
 * helper-zone qubit; Metropolis acceptance; returns the best layout seen.
 */
[[nodiscard]] AnnealResult anneal(const HardwareGraph& g,
                                  std::span<const PlacementDemand> demands,
                                  const CostWeights& w,
                                  const AnnealParams& params);

/// anneal() with params.restarts independent seeds, run concurrently.
[[nodiscard]] AnnealResult placeBatch(const HardwareGraph& g,
                                      std::span<const PlacementDemand> demands,
                                      const CostWeights& w,
                                      const AnnealParams& params);

} // namespace qmux
