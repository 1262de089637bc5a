#include "qmux/Metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qmux {

double batchUtilization(const ScheduledProgram& sp, std::size_t totalQubits) {
  if (totalQubits == 0) {
    throw std::invalid_argument("Q_tot must be >= 1");
  }
  std::set<PhysicalQubit> active;
  for (const auto& in : sp.instructions) {
    if (!in.isSystem()) {
      active.insert(in.qubits.begin(), in.qubits.end());
    }
  }
  return static_cast<double>(active.size()) / static_cast<double>(totalQubits);
}

std::optional<double>
spaceUtilization(std::span<const ScheduledProgram> programs,
                 std::size_t totalQubits) {
  if (programs.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const auto& sp : programs) {
    sum += batchUtilization(sp, totalQubits);
  }
  return sum / static_cast<double>(programs.size());
}

ShareRatio shareRatio(const ScheduledProgram& sp) {
  if (sp.helperZone.empty()) {
    return {0.0, true};
  }
  std::map<PhysicalQubit, std::set<std::size_t>> owners;
  for (const auto& ev : sp.bindingLog) {
    if (ev.kind == BindingEvent::Kind::Bind) {
      owners[ev.physical].insert(ev.owner);
    }
  }
  std::size_t shared = 0;
  for (const auto q : sp.helperZone) {
    const auto it = owners.find(q);
    if (it != owners.end() && it->second.size() >= 2) {
      ++shared;
    }
  }
  return {static_cast<double>(shared) /
              static_cast<double>(sp.helperZone.size()),
          false};
}

namespace {

void checkNormalized(const Distribution& d, const char* which) {
  double total = 0.0;
  for (const auto& [outcome, p] : d) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DistributionError(std::string(which) + " distribution has invalid "
                              "probability for outcome '" + outcome + "'");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DistributionError(std::string(which) +
                            " distribution sums to " + std::to_string(total) +
                            ", not 1");
  }
}

} // namespace

double fidelityL1(const Distribution& ideal, const Distribution& real) {
  checkNormalized(ideal, "ideal");
  checkNormalized(real, "real");
  // walk the union in key order so the sum does not depend on argument order
  double l1 = 0.0;
  auto a = ideal.begin();
  auto b = real.begin();
  while (a != ideal.end() || b != real.end()) {
    if (b == real.end() || (a != ideal.end() && a->first < b->first)) {
      l1 += a->second;
      ++a;
    } else if (a == ideal.end() || b->first < a->first) {
      l1 += b->second;
      ++b;
    } else {
      l1 += std::abs(a->second - b->second);
      ++a;
      ++b;
    }
  }
  return std::clamp(1.0 - 0.5 * l1, 0.0, 1.0);
}

std::optional<double> hrRatio(const CostBreakdown& cb) {
  const double denom = cb.intro + cb.hrcost;
  if (!(denom > 0.0)) {
    return std::nullopt;
  }
  return cb.hrcost / denom;
}

std::optional<double>
processesPerBatch(std::span<const std::size_t> memberCounts) {
  if (memberCounts.empty()) {
    return std::nullopt;
  }
  double sum = 0.0;
  for (const auto c : memberCounts) {
    sum += static_cast<double>(c);
  }
  return sum / static_cast<double>(memberCounts.size());
}

} // namespace qmux
