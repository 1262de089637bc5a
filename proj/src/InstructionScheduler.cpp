#include "qmux/InstructionScheduler.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace qmux {

namespace {

struct ProcState {
  std::size_t pc = 0;
  bool done = false;
  std::vector<std::optional<PhysicalQubit>> bound;
  std::vector<std::size_t> episodes;
};

class RoundRobin {
public:
  RoundRobin(std::span<const ProcessPtr> members,
             const std::vector<std::size_t>& active, const Layout& layout,
             const HardwareGraph& g, HelperMode mode,
             ScheduledProgram& out)
      : members_(members), active_(active), layout_(layout), g_(g),
        mode_(mode), out_(out), isFree_(g.numQubits(), false),
        states_(members.size()) {
    if (mode_ == HelperMode::Shared) {
      for (const auto q : out_.helperZone) {
        isFree_[q] = true;
      }
      freeCount_ = out_.helperZone.size();
    }
    for (const auto p : active_) {
      states_[p].bound.assign(members_[p]->numHelper(), std::nullopt);
      states_[p].episodes.assign(members_[p]->numHelper(), 0);
    }
  }

  /// Runs to completion; returns the member to evict on deadlock.
  std::optional<std::size_t> run() {
    while (true) {
      bool progressed = false;
      bool unfinished = false;
      for (const auto p : active_) {
        if (states_[p].done) {
          continue;
        }
        progressed = step(p) || progressed;
        unfinished = unfinished || !states_[p].done;
      }
      if (!unfinished) {
        return std::nullopt;
      }
      if (!progressed) {
        for (auto it = active_.rbegin(); it != active_.rend(); ++it) {
          if (!states_[*it].done) {
            return *it;
          }
        }
      }
    }
  }

private:
  std::size_t nextSeq() const { return out_.instructions.size(); }

  void emit(std::size_t owner, Opcode op, std::vector<PhysicalQubit> qubits,
            std::optional<std::size_t> classical = std::nullopt,
            double angle = 0.0) {
    out_.instructions.push_back(
        {nextSeq(), owner, op, std::move(qubits), classical, angle});
  }

  void release(std::size_t p, std::size_t s) {
    auto& st = states_[p];
    const auto phys = *st.bound[s];
    const auto seq = nextSeq();
    emit(kSystemOwner, Opcode::Reset, {phys});
    out_.bindingLog.push_back({seq, p, s, st.episodes[s] - 1, phys,
                               BindingEvent::Kind::Release});
    st.bound[s].reset();
    if (mode_ == HelperMode::Shared) {
      isFree_[phys] = true;
      ++freeCount_;
    }
  }

  bool step(std::size_t p) {
    auto& st = states_[p];
    const auto& proc = *members_[p];
    const auto instrs = proc.instructions();
    if (st.pc < instrs.size()) {
      const auto& in = instrs[st.pc];
      if (in.opcode == Opcode::FreeHelper) {
        release(p, in.operands[0].index);
      } else if (!translate(p, in)) {
        return false;
      }
      ++st.pc;
    }
    if (st.pc == instrs.size()) {
      for (std::size_t s = 0; s < st.bound.size(); ++s) {
        if (st.bound[s]) {
          release(p, s);
        }
      }
      st.done = true;
      out_.completed[p] = true;
    }
    return true;
  }

  bool translate(std::size_t p, const VirtualInstruction& in) {
    auto& st = states_[p];
    const auto& data = out_.dataQubits[p];
    std::vector<std::size_t> unbound;
    for (const auto& op : in.operands) {
      if (op.kind == OperandKind::Helper && !st.bound[op.index] &&
          std::find(unbound.begin(), unbound.end(), op.index) ==
              unbound.end()) {
        unbound.push_back(op.index);
      }
    }
    if (mode_ == HelperMode::Shared && unbound.size() > freeCount_) {
      return false;
    }
    std::vector<PhysicalQubit> anchors;
    for (const auto& op : in.operands) {
      if (op.kind == OperandKind::Data) {
        anchors.push_back(data[op.index]);
      }
    }
    if (anchors.empty()) {
      anchors = data;
    }
    for (const auto s : unbound) {
      PhysicalQubit phys = 0;
      if (mode_ == HelperMode::Shared) {
        phys = *nearestFreeHelper(anchors, out_.helperZone, isFree_, g_);
        isFree_[phys] = false;
        --freeCount_;
      } else {
        phys = layout_.at(p, members_[p]->numData() + s);
      }
      st.bound[s] = phys;
      out_.bindingLog.push_back({nextSeq(), p, s, st.episodes[s]++, phys,
                                 BindingEvent::Kind::Bind});
    }
    std::vector<PhysicalQubit> qubits;
    std::optional<std::size_t> bit;
    for (const auto& op : in.operands) {
      switch (op.kind) {
      case OperandKind::Data:
        qubits.push_back(data[op.index]);
        break;
      case OperandKind::Helper:
        qubits.push_back(*st.bound[op.index]);
        break;
      case OperandKind::Classical:
        bit = op.index;
        break;
      }
    }
    emit(p, in.opcode, std::move(qubits), bit, in.angle);
    return true;
  }

  std::span<const ProcessPtr> members_;
  const std::vector<std::size_t>& active_;
  const Layout& layout_;
  const HardwareGraph& g_;
  HelperMode mode_;
  ScheduledProgram& out_;
  std::vector<bool> isFree_;
  std::size_t freeCount_ = 0;
  std::vector<ProcState> states_;
};

std::string formatAngle(double a) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), a);
  return {buf.data(), ptr};
}

} // namespace

std::optional<PhysicalQubit>
nearestFreeHelper(std::span<const PhysicalQubit> anchors,
                  std::span<const PhysicalQubit> helperZone,
                  const std::vector<bool>& isFree, const HardwareGraph& g) {
  std::optional<PhysicalQubit> best;
  std::uint64_t bestSum = 0;
  for (const auto h : helperZone) {
    if (!isFree[h]) {
      continue;
    }
    // same anchor count for every candidate, so the sum orders like the mean
    std::uint64_t sum = 0;
    for (const auto a : anchors) {
      sum += g.distance(a, h);
    }
    if (!best || sum < bestSum || (sum == bestSum && h < *best)) {
      best = h;
      bestSum = sum;
    }
  }
  return best;
}

ScheduledProgram scheduleInstructions(std::span<const ProcessPtr> members,
                                      const Layout& layout,
                                      const HardwareGraph& g,
                                      HelperMode mode) {
  if (layout.numProcesses() != members.size()) {
    throw LayoutError("layout covers " + std::to_string(layout.numProcesses()) +
                      " processes, batch has " +
                      std::to_string(members.size()));
  }
  if (layout.numQubits() != g.numQubits()) {
    throw LayoutError("layout and hardware graph disagree on qubit count");
  }
  layout.validate();

  ScheduledProgram base;
  std::vector<bool> isData(g.numQubits(), false);
  for (std::size_t p = 0; p < members.size(); ++p) {
    const auto& proc = *members[p];
    const auto expected =
        proc.numData() + (mode == HelperMode::Exclusive ? proc.numHelper() : 0);
    if (layout.sites(p).size() != expected) {
      throw LayoutError("process " + proc.id() + " needs " +
                        std::to_string(expected) + " placed sites, layout has " +
                        std::to_string(layout.sites(p).size()));
    }
    base.processIds.push_back(proc.id());
    const auto sites = layout.sites(p);
    base.dataQubits.emplace_back(sites.begin(), sites.begin() + proc.numData());
    for (const auto q : base.dataQubits.back()) {
      isData[q] = true;
    }
  }
  for (PhysicalQubit q = 0; q < g.numQubits(); ++q) {
    if (!isData[q]) {
      base.helperZone.push_back(q);
    }
  }
  if (mode == HelperMode::Shared) {
    base.helperZone = layout.helperZone();
  }

  std::vector<std::size_t> active;
  std::vector<std::string> evicted;
  for (std::size_t p = 0; p < members.size(); ++p) {
    if (mode == HelperMode::Shared &&
        members[p]->peakHelperDemand() > base.helperZone.size()) {
      evicted.push_back(members[p]->id());
    } else {
      active.push_back(p);
    }
  }
  std::reverse(evicted.begin(), evicted.end());

  while (true) {
    ScheduledProgram sp = base;
    sp.completed.assign(members.size(), false);
    RoundRobin rr(members, active, layout, g, mode, sp);
    const auto victim = rr.run();
    if (!victim) {
      sp.evicted = evicted;
      return sp;
    }
    evicted.push_back(members[*victim]->id());
    std::erase(active, *victim);
  }
}

std::string ScheduledProgram::toText() const {
  std::ostringstream out;
  for (const auto& in : instructions) {
    out << in.seq << ' ' << (in.isSystem() ? "SYSTEM" : processIds[in.owner])
        << ' ' << opcodeName(in.opcode);
    if (in.opcode == Opcode::RZ) {
      out << '(' << formatAngle(in.angle) << ')';
    }
    for (const auto q : in.qubits) {
      out << ' ' << q;
    }
    if (in.classical) {
      out << " c" << *in.classical;
    }
    out << '\n';
  }
  return out.str();
}

IsolationReport verifyIsolation(const ScheduledProgram& sp) {
  auto fail = [](std::string msg, std::optional<PhysicalQubit> q,
                 std::vector<std::size_t> pos) {
    return IsolationReport{false, std::move(msg), q, std::move(pos)};
  };

  // (c) disjoint data regions
  std::map<PhysicalQubit, std::size_t> dataOwner;
  for (std::size_t p = 0; p < sp.dataQubits.size(); ++p) {
    for (const auto q : sp.dataQubits[p]) {
      const auto [it, fresh] = dataOwner.emplace(q, p);
      if (!fresh) {
        return fail("data regions overlap: physical qubit " +
                        std::to_string(q) + " belongs to " +
                        sp.processIds[it->second] + " and " +
                        sp.processIds[p],
                    q, {});
      }
    }
  }

  struct Episode {
    std::size_t owner;
    std::size_t helper;
    std::size_t index;
    PhysicalQubit phys;
    std::size_t bind;
    std::optional<std::size_t> release;
  };
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Episode> byKey;
  for (const auto& ev : sp.bindingLog) {
    const auto key = std::make_tuple(ev.owner, ev.helper, ev.episode);
    if (ev.kind == BindingEvent::Kind::Bind) {
      if (dataOwner.contains(ev.physical)) {
        return fail("helper bound onto data qubit " +
                        std::to_string(ev.physical),
                    ev.physical, {ev.seq});
      }
      byKey[key] = {ev.owner, ev.helper, ev.episode, ev.physical, ev.seq,
                    std::nullopt};
    } else {
      auto it = byKey.find(key);
      if (it == byKey.end() || it->second.phys != ev.physical) {
        return fail("release without a matching bind on qubit " +
                        std::to_string(ev.physical),
                    ev.physical, {ev.seq});
      }
      it->second.release = ev.seq;
    }
  }
  std::map<PhysicalQubit, std::vector<Episode>> perQubit;
  for (const auto& [key, ep] : byKey) {
    perQubit[ep.phys].push_back(ep);
  }

  auto liveOwner = [&](PhysicalQubit q,
                       std::size_t seq) -> std::optional<std::size_t> {
    const auto it = perQubit.find(q);
    if (it == perQubit.end()) {
      return std::nullopt;
    }
    for (const auto& ep : it->second) {
      if (ep.bind <= seq && (!ep.release || seq < *ep.release)) {
        return ep.owner;
      }
    }
    return std::nullopt;
  };

  // (b) every operand belongs to the instruction's owner
  for (const auto& in : sp.instructions) {
    if (in.isSystem()) {
      if (in.opcode != Opcode::Reset || in.qubits.size() != 1) {
        return fail("SYSTEM instruction " + std::to_string(in.seq) +
                        " is not a single-qubit RESET",
                    std::nullopt, {in.seq});
      }
      continue;
    }
    for (const auto q : in.qubits) {
      const auto d = dataOwner.find(q);
      const bool own = (d != dataOwner.end() && d->second == in.owner) ||
                       (d == dataOwner.end() && liveOwner(q, in.seq) == in.owner);
      if (!own) {
        return fail("instruction " + std::to_string(in.seq) + " of " +
                        sp.processIds[in.owner] +
                        " touches physical qubit " + std::to_string(q) +
                        " which it does not own",
                    q, {in.seq});
      }
    }
  }

  // (a) exactly one RESET between consecutive episodes on a qubit
  for (auto& [q, eps] : perQubit) {
    std::sort(eps.begin(), eps.end(),
              [](const auto& a, const auto& b) { return a.bind < b.bind; });
    auto usesOf = [&](const Episode& ep) {
      std::vector<std::size_t> seqs;
      for (const auto& in : sp.instructions) {
        if (in.isSystem() || in.owner != ep.owner || in.seq < ep.bind ||
            (ep.release && in.seq >= *ep.release)) {
          continue;
        }
        if (std::find(in.qubits.begin(), in.qubits.end(), q) !=
            in.qubits.end()) {
          seqs.push_back(in.seq);
        }
      }
      return seqs;
    };
    for (std::size_t k = 0; k + 1 < eps.size(); ++k) {
      const auto& prev = eps[k];
      const auto& next = eps[k + 1];
      if (!prev.release || *prev.release > next.bind) {
        return fail("qubit " + std::to_string(q) +
                        " is bound to two live helper episodes",
                    q, {prev.bind, next.bind});
      }
      const auto prevUses = usesOf(prev);
      const auto nextUses = usesOf(next);
      const auto from = prevUses.empty() ? prev.bind : prevUses.back();
      const auto to = nextUses.empty() ? next.bind : nextUses.front();
      std::size_t resets = 0;
      for (const auto& in : sp.instructions) {
        if (in.isSystem() && in.opcode == Opcode::Reset && in.seq > from &&
            in.seq < to && in.qubits.size() == 1 && in.qubits[0] == q) {
          ++resets;
        }
      }
      if (resets != 1) {
        return fail("qubit " + std::to_string(q) + " has " +
                        std::to_string(resets) +
                        " RESET(s) between the episode ending at " +
                        std::to_string(from) + " and the one starting at " +
                        std::to_string(to),
                    q, {from, to});
      }
    }
  }
  return {};
}

} // namespace qmux
