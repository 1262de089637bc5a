#include "qmux/BatchScheduler.hpp"

#include <algorithm>
#include <limits>

namespace qmux {

void SchedulerConfig::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("lambda must lie in (0, 1), got " +
                                std::to_string(lambda));
  }
  if (maxShots == 0) {
    throw std::invalid_argument("S_max must be >= 1");
  }
  if (!(waitBound >= 0.0)) {
    throw std::invalid_argument("wait bound must be >= 0");
  }
  if (totalQubits == 0) {
    throw std::invalid_argument("Q_tot must be >= 1");
  }
}

QueueEntry admit(ProcessPtr process, std::size_t totalQubits,
                 bool shareHelpers) {
  const auto footprint =
      process->numData() + (shareHelpers ? 0 : process->numHelper());
  if (footprint >= totalQubits) {
    throw AdmissionError("process " + process->id() + " needs " +
                         std::to_string(footprint) +
                         " qubits but the device has " +
                         std::to_string(totalQubits) +
                         "; it can never be batched");
  }
  const auto shots = process->shots();
  return {std::move(process), shots, footprint};
}

std::string_view reasonName(FormationReason r) noexcept {
  return r == FormationReason::Threshold ? "threshold" : "timeout";
}

std::size_t Batch::maxDepth() const {
  std::size_t d = 0;
  for (const auto& m : members) {
    d = std::max(d, m.depth());
  }
  return d;
}

std::uint64_t Batch::makespan() const { return shots * maxDepth(); }

std::uint64_t Batch::capacity() const { return totalQubits * makespan(); }

std::uint64_t Batch::work() const {
  std::uint64_t w = 0;
  for (const auto& m : members) {
    w += static_cast<std::uint64_t>(m.numData()) * m.depth();
  }
  return w * shots;
}

std::size_t Batch::footprint() const {
  std::size_t f = 0;
  for (const auto& m : members) {
    f += m.footprint;
  }
  return f;
}

std::vector<std::string> Batch::memberIds() const {
  std::vector<std::string> ids;
  ids.reserve(members.size());
  for (const auto& m : members) {
    ids.push_back(m.id());
  }
  return ids;
}

std::vector<QueueEntry> prioritize(std::vector<QueueEntry> queue) {
  std::sort(queue.begin(), queue.end(),
            [](const QueueEntry& a, const QueueEntry& b) {
              const auto da = a.totalDepthDemand();
              const auto db = b.totalDepthDemand();
              if (da != db) {
                return da < db;
              }
              if (a.arrival() != b.arrival()) {
                return a.arrival() < b.arrival();
              }
              return a.id() < b.id();
            });
  return queue;
}

std::vector<QueueEntry> arrivalOrder(std::vector<QueueEntry> queue) {
  std::sort(queue.begin(), queue.end(),
            [](const QueueEntry& a, const QueueEntry& b) {
              if (a.arrival() != b.arrival()) {
                return a.arrival() < b.arrival();
              }
              return a.id() < b.id();
            });
  return queue;
}

std::uint64_t batchShots(std::span<const QueueEntry> members,
                         const SchedulerConfig& cfg) {
  auto s = cfg.maxShots;
  for (const auto& m : members) {
    s = std::min(s, m.remainingShots);
  }
  return s;
}

std::optional<Batch> formBatch(std::span<const QueueEntry> ordered,
                               const SchedulerConfig& cfg, double now) {
  cfg.validate();
  if (ordered.empty()) {
    return std::nullopt;
  }
  const double threshold = cfg.lambda * static_cast<double>(cfg.totalQubits);
  Batch batch;
  batch.totalQubits = cfg.totalQubits;
  std::size_t used = 0;
  double oldest = std::numeric_limits<double>::infinity();
  for (const auto& entry : ordered) {
    if (entry.footprint >= cfg.totalQubits) {
      throw AdmissionError("process " + entry.id() +
                           " cannot fit on the device and must not be queued");
    }
    oldest = std::min(oldest, entry.arrival());
  }
  for (const auto& entry : ordered) {
    if (cfg.fill == BatchFill::UntilThreshold &&
        static_cast<double>(used) >= threshold) {
      break;
    }
    if (used + entry.footprint < cfg.totalQubits) {
      used += entry.footprint;
      batch.members.push_back(entry);
    }
  }
  if (static_cast<double>(used) >= threshold) {
    batch.reason = FormationReason::Threshold;
  } else if (now - oldest >= cfg.waitBound) {
    batch.reason = FormationReason::Timeout;
  } else {
    return std::nullopt;
  }
  batch.shots = batchShots(batch.members, cfg);
  return batch;
}

std::vector<QueueEntry> settleBatch(const Batch& batch,
                                    std::vector<QueueEntry> queue) {
  for (const auto& member : batch.members) {
    auto it = std::find_if(queue.begin(), queue.end(), [&](const auto& e) {
      return e.id() == member.id();
    });
    if (it == queue.end()) {
      continue;
    }
    it->remainingShots -= std::min(it->remainingShots, batch.shots);
  }
  std::erase_if(queue, [](const QueueEntry& e) { return e.remainingShots == 0; });
  return queue;
}

std::optional<double> spaceTimeUtility(std::span<const Batch> batches) {
  if (batches.empty()) {
    return std::nullopt;
  }
  std::uint64_t work = 0;
  std::uint64_t cap = 0;
  for (const auto& b : batches) {
    work += b.work();
    cap += b.capacity();
  }
  if (cap == 0) {
    return std::nullopt;
  }
  return static_cast<double>(work) / static_cast<double>(cap);
}

} // namespace qmux
