#include "qmux/SpaceManager.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <random>

namespace qmux {

namespace {

constexpr auto kFree = std::numeric_limits<std::size_t>::max();
constexpr auto kFar = std::numeric_limits<std::uint32_t>::max();

std::int64_t swapProxy(std::uint32_t d) {
  return d > 1 ? static_cast<std::int64_t>(d) - 1 : 0;
}

/// Multi-source BFS distance from every qubit to the nearest free qubit.
void distanceToFree(const HardwareGraph& g, const std::vector<bool>& isFree,
                    std::vector<std::uint32_t>& dist,
                    std::vector<PhysicalQubit>& queue) {
  const auto n = g.numQubits();
  dist.assign(n, kFar);
  queue.clear();
  for (PhysicalQubit v = 0; v < n; ++v) {
    if (isFree[v]) {
      dist[v] = 0;
      queue.push_back(v);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto u = queue[head];
    for (const auto v : g.neighbors(u)) {
      if (dist[v] == kFar) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
}

std::int64_t crossSum(const HardwareGraph& g, std::span<const PhysicalQubit> a,
                      std::span<const PhysicalQubit> b) {
  std::int64_t s = 0;
  for (const auto u : a) {
    for (const auto v : b) {
      s += g.distanceUnchecked(u, v);
    }
  }
  return s;
}

/// Inter from the pairwise cross sums; shared by the direct and incremental
/// paths so both produce bit-identical values.
double interFromSums(std::span<const std::int64_t> sums,
                     std::span<const PlacementDemand> demands) {
  const auto m = demands.size();
  if (m < 2) {
    return 0.0;
  }
  double acc = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      acc += static_cast<double>(sums[a * m + b]) /
             static_cast<double>(demands[a].sites * demands[b].sites);
    }
  }
  return acc / static_cast<double>(m * (m - 1) / 2);
}

double combine(const CostWeights& w, double intro, double inter, double hr) {
  return w.alpha * intro - w.beta * inter + w.gamma * hr;
}

void checkShape(const Layout& layout,
                std::span<const PlacementDemand> demands) {
  if (layout.numProcesses() != demands.size()) {
    throw LayoutError("layout has " + std::to_string(layout.numProcesses()) +
                      " processes, demand list has " +
                      std::to_string(demands.size()));
  }
  for (std::size_t p = 0; p < demands.size(); ++p) {
    if (layout.sites(p).size() != demands[p].sites) {
      throw LayoutError("process " + demands[p].id + " expects " +
                        std::to_string(demands[p].sites) + " sites");
    }
  }
}

/**
 * Layout plus cached cost components, updated incrementally per move.
 * Sums are kept as integers so incremental and direct evaluation agree
 * exactly.
 */
class AnnealState {
public:
  struct Move {
    bool isSwap;
    std::size_t p;
    std::size_t i;
    std::size_t j;         // swap partner
    PhysicalQubit from;    // move origin
    PhysicalQubit to;      // move target
  };

  AnnealState(const HardwareGraph& g, std::span<const PlacementDemand> demands,
              const CostWeights& w, Layout layout)
      : g_(g), demands_(demands), w_(w), layout_(std::move(layout)),
        m_(demands.size()), occupant_(g.numQubits(), {kFree, kFree}),
        isFree_(g.numQubits(), true), cross_(m_ * m_, 0) {
    checkShape(layout_, demands_);
    neighbors_.resize(m_);
    for (std::size_t p = 0; p < m_; ++p) {
      neighbors_[p].resize(demands_[p].sites);
      for (const auto& pr : demands_[p].pairs) {
        neighbors_[p][pr.a].push_back({pr.b, pr.count});
        neighbors_[p][pr.b].push_back({pr.a, pr.count});
      }
      for (std::size_t i = 0; i < demands_[p].sites; ++i) {
        const auto v = layout_.at(p, i);
        occupant_[v] = {p, i};
        isFree_[v] = false;
        ++totalSites_;
      }
      usesHelpers_ = usesHelpers_ || demands_[p].usesHelpers();
    }
    recomputeAll();
  }

  [[nodiscard]] double total() const {
    return combine(w_, static_cast<double>(intro_), inter(),
                   static_cast<double>(hr_));
  }
  [[nodiscard]] double inter() const { return interFromSums(cross_, demands_); }
  [[nodiscard]] const Layout& layout() const { return layout_; }

  /// Draws a random legal move; false if none was found.
  template <typename Rng> bool propose(Rng& rng, Move& mv) {
    std::uniform_int_distribution<std::size_t> pickSite(0, totalSites_ - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int attempt = 0; attempt < 8; ++attempt) {
      auto [p, i] = siteByRank(pickSite(rng));
      bool wantSwap = coin(rng) == 0;
      if (wantSwap && demands_[p].sites < 2) {
        wantSwap = false;
      }
      if (wantSwap) {
        std::uniform_int_distribution<std::size_t> other(
            0, demands_[p].sites - 2);
        auto j = other(rng);
        if (j >= i) {
          ++j;
        }
        mv = {true, p, i, j, 0, 0};
        return true;
      }
      const auto from = layout_.at(p, i);
      candidates_.clear();
      for (const auto v : g_.neighbors(from)) {
        if (isFree_[v]) {
          candidates_.push_back(v);
        }
      }
      if (candidates_.empty()) {
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0,
                                                      candidates_.size() - 1);
      mv = {false, p, i, 0, from, candidates_[pick(rng)]};
      return true;
    }
    return false;
  }

  void apply(const Move& mv) {
    if (mv.isSwap) {
      applySwap(mv.p, mv.i, mv.j);
    } else {
      applyMove(mv.p, mv.i, mv.to);
    }
  }

  void undo(const Move& mv) {
    if (mv.isSwap) {
      applySwap(mv.p, mv.i, mv.j);
    } else {
      applyMove(mv.p, mv.i, mv.from);
    }
  }

  /// O(|V|) consistency check of the occupancy map against the layout.
  void checkInvariants() const {
    std::size_t occupied = 0;
    for (PhysicalQubit v = 0; v < occupant_.size(); ++v) {
      const auto [p, i] = occupant_[v];
      if (p == kFree) {
        if (!isFree_[v]) {
          throw LayoutError("occupancy map out of sync at qubit " +
                            std::to_string(v));
        }
        continue;
      }
      ++occupied;
      if (isFree_[v] || layout_.at(p, i) != v) {
        throw LayoutError("occupancy map out of sync at qubit " +
                          std::to_string(v));
      }
    }
    if (occupied != totalSites_) {
      throw LayoutError("layout lost injectivity");
    }
  }

private:
  std::pair<std::size_t, std::size_t> siteByRank(std::size_t r) const {
    for (std::size_t p = 0; p < m_; ++p) {
      if (r < demands_[p].sites) {
        return {p, r};
      }
      r -= demands_[p].sites;
    }
    return {m_ - 1, 0};
  }

  std::int64_t siteIntro(std::size_t p, std::size_t i) const {
    std::int64_t s = 0;
    const auto u = layout_.at(p, i);
    for (const auto& [k, count] : neighbors_[p][i]) {
      s += static_cast<std::int64_t>(count) *
           swapProxy(g_.distanceUnchecked(u, layout_.at(p, k)));
    }
    return s;
  }

  std::int64_t siteHr(std::size_t p, std::size_t i) const {
    const auto n = demands_[p].helperGates[i];
    if (n == 0) {
      return 0;
    }
    return static_cast<std::int64_t>(n) * swapProxy(distToH_[layout_.at(p, i)]);
  }

  void recomputeAll() {
    intro_ = 0;
    for (std::size_t p = 0; p < m_; ++p) {
      for (const auto& pr : demands_[p].pairs) {
        intro_ += static_cast<std::int64_t>(pr.count) *
                  swapProxy(g_.distanceUnchecked(layout_.at(p, pr.a),
                                                 layout_.at(p, pr.b)));
      }
    }
    for (std::size_t a = 0; a < m_; ++a) {
      for (std::size_t b = a + 1; b < m_; ++b) {
        cross_[a * m_ + b] = crossSum(g_, layout_.sites(a), layout_.sites(b));
      }
    }
    recomputeHr();
  }

  void recomputeHr() {
    hr_ = 0;
    if (!usesHelpers_) {
      return;
    }
    distanceToFree(g_, isFree_, distToH_, bfsQueue_);
    for (std::size_t p = 0; p < m_; ++p) {
      for (std::size_t i = 0; i < demands_[p].sites; ++i) {
        hr_ += siteHr(p, i);
      }
    }
  }

  void applySwap(std::size_t p, std::size_t i, std::size_t j) {
    intro_ -= siteIntro(p, i) + siteIntro(p, j);
    hr_ -= siteHr(p, i) + siteHr(p, j);
    layout_.swapSites(p, i, j);
    occupant_[layout_.at(p, i)] = {p, i};
    occupant_[layout_.at(p, j)] = {p, j};
    intro_ += siteIntro(p, i) + siteIntro(p, j);
    hr_ += siteHr(p, i) + siteHr(p, j);
  }

  void applyMove(std::size_t p, std::size_t i, PhysicalQubit to) {
    const auto from = layout_.at(p, i);
    intro_ -= siteIntro(p, i);
    for (std::size_t b = 0; b < m_; ++b) {
      if (b == p) {
        continue;
      }
      std::int64_t delta = 0;
      for (const auto v : layout_.sites(b)) {
        delta += static_cast<std::int64_t>(g_.distanceUnchecked(to, v)) -
                 static_cast<std::int64_t>(g_.distanceUnchecked(from, v));
      }
      cross_[std::min(p, b) * m_ + std::max(p, b)] += delta;
    }
    layout_.moveSite(p, i, to);
    occupant_[from] = {kFree, kFree};
    occupant_[to] = {p, i};
    isFree_[from] = true;
    isFree_[to] = false;
    intro_ += siteIntro(p, i);
    recomputeHr();
  }

  const HardwareGraph& g_;
  std::span<const PlacementDemand> demands_;
  CostWeights w_;
  Layout layout_;
  std::size_t m_;
  std::size_t totalSites_ = 0;
  bool usesHelpers_ = false;
  std::vector<std::vector<std::vector<std::pair<std::size_t, std::size_t>>>>
      neighbors_;
  std::vector<std::pair<std::size_t, std::size_t>> occupant_;
  std::vector<bool> isFree_;
  std::vector<std::int64_t> cross_;
  std::int64_t intro_ = 0;
  std::int64_t hr_ = 0;
  std::vector<std::uint32_t> distToH_;
  std::vector<PhysicalQubit> bfsQueue_;
  std::vector<PhysicalQubit> candidates_;
};

} // namespace

void CostWeights::validate() const {
  if (!(alpha >= 0) || !(beta >= 0) || !(gamma >= 0)) {
    throw std::invalid_argument("cost weights must be non-negative");
  }
}

bool PlacementDemand::usesHelpers() const noexcept {
  return std::any_of(helperGates.begin(), helperGates.end(),
                     [](std::size_t n) { return n > 0; });
}

PlacementDemand placementDemand(const Process& p, bool reserveHelpers) {
  PlacementDemand d;
  d.id = p.id();
  d.sites = p.numData() + (reserveHelpers ? p.numHelper() : 0);
  d.helperGates.assign(d.sites, 0);
  auto siteOf = [&](const VirtualOperand& op) -> std::optional<std::size_t> {
    if (op.kind == OperandKind::Data) {
      return op.index;
    }
    if (op.kind == OperandKind::Helper && reserveHelpers) {
      return p.numData() + op.index;
    }
    return std::nullopt;
  };
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
  for (const auto& in : p.instructions()) {
    if (!isTwoQubitGate(in.opcode)) {
      continue;
    }
    const auto a = siteOf(in.operands[0]);
    const auto b = siteOf(in.operands[1]);
    if (a && b) {
      ++pairs[{std::min(*a, *b), std::max(*a, *b)}];
    } else if (a && in.operands[1].kind == OperandKind::Helper) {
      ++d.helperGates[*a];
    } else if (b && in.operands[0].kind == OperandKind::Helper) {
      ++d.helperGates[*b];
    }
  }
  for (const auto& [ab, count] : pairs) {
    d.pairs.push_back({ab.first, ab.second, count});
  }
  return d;
}

Layout::Layout(std::size_t numQubits,
               std::vector<std::vector<PhysicalQubit>> sites)
    : numQubits_(numQubits), sites_(std::move(sites)) {
  validate();
}

std::vector<PhysicalQubit> Layout::helperZone() const {
  std::vector<bool> used(numQubits_, false);
  for (const auto& s : sites_) {
    for (const auto q : s) {
      used[q] = true;
    }
  }
  std::vector<PhysicalQubit> zone;
  for (PhysicalQubit q = 0; q < numQubits_; ++q) {
    if (!used[q]) {
      zone.push_back(q);
    }
  }
  return zone;
}

void Layout::swapSites(std::size_t p, std::size_t i, std::size_t j) {
  std::swap(sites_.at(p).at(i), sites_.at(p).at(j));
}

void Layout::moveSite(std::size_t p, std::size_t i, PhysicalQubit to) {
  sites_.at(p).at(i) = to;
}

void Layout::validate() const {
  std::vector<bool> used(numQubits_, false);
  for (std::size_t p = 0; p < sites_.size(); ++p) {
    for (const auto q : sites_[p]) {
      if (q >= numQubits_) {
        throw LayoutError("process " + std::to_string(p) +
                          " is placed on qubit " + std::to_string(q) +
                          " outside the device");
      }
      if (used[q]) {
        throw LayoutError("physical qubit " + std::to_string(q) +
                          " is assigned twice");
      }
      used[q] = true;
    }
  }
}

double introCost(const Layout& layout, const HardwareGraph& g,
                 std::span<const PlacementDemand> demands) {
  checkShape(layout, demands);
  std::int64_t s = 0;
  for (std::size_t p = 0; p < demands.size(); ++p) {
    for (const auto& pr : demands[p].pairs) {
      s += static_cast<std::int64_t>(pr.count) *
           swapProxy(g.distance(layout.at(p, pr.a), layout.at(p, pr.b)));
    }
  }
  return static_cast<double>(s);
}

double interCost(const Layout& layout, const HardwareGraph& g,
                 std::span<const PlacementDemand> demands) {
  checkShape(layout, demands);
  const auto m = demands.size();
  std::vector<std::int64_t> sums(m * m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      sums[a * m + b] = crossSum(g, layout.sites(a), layout.sites(b));
    }
  }
  return interFromSums(sums, demands);
}

double hrCost(const Layout& layout, const HardwareGraph& g,
              std::span<const PlacementDemand> demands) {
  checkShape(layout, demands);
  const bool needed = std::any_of(demands.begin(), demands.end(),
                                  [](const auto& d) { return d.usesHelpers(); });
  if (!needed) {
    return 0.0;
  }
  const auto zone = layout.helperZone();
  if (zone.empty()) {
    throw LayoutError("layout leaves no helper zone but the batch uses "
                      "helper qubits");
  }
  std::vector<bool> isFree(g.numQubits(), false);
  for (const auto q : zone) {
    isFree[q] = true;
  }
  std::vector<std::uint32_t> dist;
  std::vector<PhysicalQubit> queue;
  distanceToFree(g, isFree, dist, queue);
  std::int64_t s = 0;
  for (std::size_t p = 0; p < demands.size(); ++p) {
    for (std::size_t i = 0; i < demands[p].sites; ++i) {
      s += static_cast<std::int64_t>(demands[p].helperGates[i]) *
           swapProxy(dist[layout.at(p, i)]);
    }
  }
  return static_cast<double>(s);
}

CostBreakdown totalCost(const Layout& layout, const HardwareGraph& g,
                        std::span<const PlacementDemand> demands,
                        const CostWeights& w) {
  CostBreakdown cb;
  cb.intro = introCost(layout, g, demands);
  cb.inter = interCost(layout, g, demands);
  cb.hrcost = hrCost(layout, g, demands);
  cb.total = combine(w, cb.intro, cb.inter, cb.hrcost);
  return cb;
}

Layout initialLayout(const HardwareGraph& g,
                     std::span<const PlacementDemand> demands,
                     std::uint64_t seed) {
  const auto n = g.numQubits();
  std::size_t total = 0;
  for (const auto& d : demands) {
    if (d.sites == 0) {
      throw LayoutError("process " + d.id + " has no sites to place");
    }
    total += d.sites;
  }
  if (total >= n) {
    throw LayoutError("batch needs " + std::to_string(total) +
                      " sites but the device has only " + std::to_string(n) +
                      " qubits (one must remain for the helper zone)");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(demands.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return demands[a].sites > demands[b].sites;
  });

  std::vector<bool> occupied(n, false);
  std::vector<PhysicalQubit> placed;
  std::vector<std::vector<PhysicalQubit>> sites(demands.size());
  std::vector<PhysicalQubit> best;
  for (const auto p : order) {
    // seed qubit: farthest from everything placed so far
    std::uint32_t bestScore = 0;
    best.clear();
    for (PhysicalQubit v = 0; v < n; ++v) {
      if (occupied[v]) {
        continue;
      }
      std::uint32_t score = 0;
      if (placed.empty()) {
        for (PhysicalQubit u = 0; u < n; ++u) {
          score = std::max(score, g.distanceUnchecked(u, v));
        }
      } else {
        score = kFar;
        for (const auto u : placed) {
          score = std::min(score, g.distanceUnchecked(u, v));
        }
      }
      if (best.empty() || score > bestScore) {
        bestScore = score;
        best.assign(1, v);
      } else if (score == bestScore) {
        best.push_back(v);
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
    const auto root = best[pick(rng)];

    // grow through free qubits
    auto& cluster = sites[p];
    std::vector<bool> seen(n, false);
    std::vector<PhysicalQubit> frontier{root};
    seen[root] = true;
    for (std::size_t head = 0;
         head < frontier.size() && cluster.size() < demands[p].sites; ++head) {
      const auto u = frontier[head];
      cluster.push_back(u);
      for (const auto v : g.neighbors(u)) {
        if (!seen[v] && !occupied[v]) {
          seen[v] = true;
          frontier.push_back(v);
        }
      }
    }
    if (cluster.size() < demands[p].sites) {
      // free region around the root is too small; take nearest free qubits
      std::vector<PhysicalQubit> rest;
      for (PhysicalQubit v = 0; v < n; ++v) {
        if (!occupied[v] &&
            std::find(cluster.begin(), cluster.end(), v) == cluster.end()) {
          rest.push_back(v);
        }
      }
      std::stable_sort(rest.begin(), rest.end(), [&](auto a, auto b) {
        return g.distanceUnchecked(root, a) < g.distanceUnchecked(root, b);
      });
      for (std::size_t k = 0; cluster.size() < demands[p].sites; ++k) {
        cluster.push_back(rest[k]);
      }
    }
    for (const auto v : cluster) {
      occupied[v] = true;
      placed.push_back(v);
    }
  }
  return {n, std::move(sites)};
}

AnnealResult anneal(const HardwareGraph& g,
                    std::span<const PlacementDemand> demands,
                    const CostWeights& w, const AnnealParams& params) {
  w.validate();
  if (!(params.cooling > 0.0 && params.cooling <= 1.0)) {
    throw std::invalid_argument("cooling factor must lie in (0, 1]");
  }
  AnnealResult result;
  result.seed = params.seed;
  result.initial = initialLayout(g, demands, params.seed);
  result.initialCost = totalCost(result.initial, g, demands, w);
  result.layout = result.initial;
  result.cost = result.initialCost;
  if (params.iterations == 0 || demands.empty()) {
    return result;
  }

  std::size_t totalSites = 0;
  for (const auto& d : demands) {
    totalSites += d.sites;
  }
  const auto moves = params.movesPerIteration > 0 ? params.movesPerIteration
                                                  : 100 * totalSites;

  std::mt19937_64 rng(params.seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AnnealState state(g, demands, w, result.initial);
  AnnealState::Move mv{};

  double temperature = params.initialTemperature;
  if (temperature <= 0.0) {
    // exp(-mean uphill / T) = 1/2
    double uphill = 0.0;
    std::size_t count = 0;
    const double base = state.total();
    for (int k = 0; k < 100; ++k) {
      if (!state.propose(rng, mv)) {
        continue;
      }
      state.apply(mv);
      const double delta = state.total() - base;
      state.undo(mv);
      if (delta > 1e-12) {
        uphill += delta;
        ++count;
      }
    }
    temperature = count > 0 ? (uphill / count) / std::log(2.0) : 1.0;
  }
  result.initialTemperature = temperature;

  double current = state.total();
  double best = current;
  Layout bestLayout = state.layout();
  for (std::size_t it = 0; it < params.iterations; ++it) {
    std::size_t accepted = 0;
    for (std::size_t k = 0; k < moves; ++k) {
      if (!state.propose(rng, mv)) {
        continue;
      }
      state.apply(mv);
      const double next = state.total();
      const double delta = next - current;
      if (delta <= 0.0 || unit(rng) < std::exp(-delta / temperature)) {
        current = next;
        ++accepted;
        state.checkInvariants();
        if (current < best - 1e-12) {
          best = current;
          bestLayout = state.layout();
        }
      } else {
        state.undo(mv);
      }
    }
    result.trace.push_back({it, temperature, current, best, accepted});
    temperature *= params.cooling;
  }

  bestLayout.validate();
  result.layout = std::move(bestLayout);
  result.cost = totalCost(result.layout, g, demands, w);
  if (result.cost.total > result.initialCost.total) {
    result.layout = result.initial;
    result.cost = result.initialCost;
  }
  return result;
}

AnnealResult placeBatch(const HardwareGraph& g,
                        std::span<const PlacementDemand> demands,
                        const CostWeights& w, const AnnealParams& params) {
  const auto runs = std::max<std::size_t>(1, params.restarts);
  if (runs == 1) {
    return anneal(g, demands, w, params);
  }
  std::vector<std::future<AnnealResult>> futures;
  futures.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    auto p = params;
    p.seed = params.seed + r;
    p.restarts = 1;
    futures.push_back(std::async(std::launch::async, [&g, demands, &w, p] {
      return anneal(g, demands, w, p);
    }));
  }
  std::optional<AnnealResult> best;
  for (auto& f : futures) {
    auto r = f.get();
    if (!best || r.cost.total < best->cost.total) {
      best = std::move(r);
    }
  }
  return std::move(*best);
}

} // namespace qmux
