#include "qmux/Process.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace qmux {

namespace {

constexpr std::array<std::pair<Opcode, std::string_view>, 13> kOpcodeNames{{
    {Opcode::H, "H"},
    {Opcode::X, "X"},
    {Opcode::Y, "Y"},
    {Opcode::Z, "Z"},
    {Opcode::S, "S"},
    {Opcode::T, "T"},
    {Opcode::RZ, "RZ"},
    {Opcode::CX, "CX"},
    {Opcode::CZ, "CZ"},
    {Opcode::SWAP, "SWAP"},
    {Opcode::Measure, "MEASURE"},
    {Opcode::FreeHelper, "FREE_HELPER"},
    {Opcode::Reset, "RESET"},
}};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return out;
}

std::string formatAngle(double a) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), a);
  return {buf.data(), ptr};
}

/// Returns an error description, or nothing if `instr` is well formed.
std::optional<std::string> checkShape(const VirtualInstruction& instr,
                                      std::size_t numData,
                                      std::size_t numHelper) {
  const auto& ops = instr.operands;
  const auto name = std::string(opcodeName(instr.opcode));
  for (const auto& op : ops) {
    if (op.kind == OperandKind::Data && op.index >= numData) {
      return "operand " + op.toString() + " out of range (data " +
             std::to_string(numData) + ")";
    }
    if (op.kind == OperandKind::Helper && op.index >= numHelper) {
      return "operand " + op.toString() + " out of range (helper " +
             std::to_string(numHelper) + ")";
    }
  }
  switch (instr.opcode) {
  case Opcode::Measure:
    if (ops.size() != 2 || !ops[0].isQubit() ||
        ops[1].kind != OperandKind::Classical) {
      return "MEASURE takes one qubit and one classical operand";
    }
    return std::nullopt;
  case Opcode::FreeHelper:
    if (ops.size() != 1 || ops[0].kind != OperandKind::Helper) {
      return "FREE_HELPER takes exactly one helper operand";
    }
    return std::nullopt;
  case Opcode::Reset:
    return "RESET is a hardware instruction and cannot appear in a process";
  default:
    break;
  }
  const std::size_t arity = isTwoQubitGate(instr.opcode) ? 2 : 1;
  if (ops.size() != arity ||
      !std::all_of(ops.begin(), ops.end(),
                   [](const auto& o) { return o.isQubit(); })) {
    return name + " takes " + std::to_string(arity) + " qubit operand(s)";
  }
  if (arity == 2 && ops[0] == ops[1]) {
    return name + " operands must be distinct";
  }
  return std::nullopt;
}

struct HelperTracker {
  std::vector<bool> live;
  std::size_t liveCount = 0;
  std::size_t peak = 0;

  explicit HelperTracker(std::size_t n) : live(n, false) {}

  std::optional<std::string> step(const VirtualInstruction& instr) {
    if (instr.opcode == Opcode::FreeHelper) {
      const auto idx = instr.operands[0].index;
      if (!live[idx]) {
        return "FREE_HELPER s" + std::to_string(idx) +
               " without a preceding use";
      }
      live[idx] = false;
      --liveCount;
      return std::nullopt;
    }
    for (const auto& op : instr.operands) {
      if (op.kind == OperandKind::Helper && !live[op.index]) {
        live[op.index] = true;
        ++liveCount;
      }
    }
    peak = std::max(peak, liveCount);
    return std::nullopt;
  }
};

VirtualOperand parseOperand(std::string_view tok, std::size_t line) {
  if (tok.size() < 2) {
    throw ProcessError("line " + std::to_string(line) + ": bad operand '" +
                           std::string(tok) + "'",
                       line);
  }
  OperandKind kind{};
  switch (tok[0]) {
  case 'q':
  case 'Q':
    kind = OperandKind::Data;
    break;
  case 's':
  case 'S':
    kind = OperandKind::Helper;
    break;
  case 'c':
  case 'C':
    kind = OperandKind::Classical;
    break;
  default:
    throw ProcessError("line " + std::to_string(line) + ": bad operand '" +
                           std::string(tok) + "' (expected q<i>, s<i>, c<i>)",
                       line);
  }
  std::size_t idx = 0;
  const auto* first = tok.data() + 1;
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, idx);
  if (ec != std::errc{} || ptr != last) {
    throw ProcessError("line " + std::to_string(line) + ": bad operand '" +
                           std::string(tok) + "'",
                       line);
  }
  return {kind, idx};
}

std::uint64_t parseCount(const std::string& tok, std::string_view key,
                         std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ProcessError("line " + std::to_string(line) + ": '" +
                           std::string(key) + "' expects a count, got '" +
                           tok + "'",
                       line);
  }
  return v;
}

} // namespace

std::string_view opcodeName(Opcode op) noexcept {
  for (const auto& [code, name] : kOpcodeNames) {
    if (code == op) {
      return name;
    }
  }
  return "?";
}

std::optional<Opcode> opcodeFromName(std::string_view name) {
  const auto u = upper(name);
  for (const auto& [code, n] : kOpcodeNames) {
    if (n == u && code != Opcode::Reset) {
      return code;
    }
  }
  return std::nullopt;
}

bool isTwoQubitGate(Opcode op) noexcept {
  return op == Opcode::CX || op == Opcode::CZ || op == Opcode::SWAP;
}

bool isSingleQubitGate(Opcode op) noexcept {
  switch (op) {
  case Opcode::H:
  case Opcode::X:
  case Opcode::Y:
  case Opcode::Z:
  case Opcode::S:
  case Opcode::T:
  case Opcode::RZ:
    return true;
  default:
    return false;
  }
}

std::string VirtualOperand::toString() const {
  const char prefix = kind == OperandKind::Data     ? 'q'
                      : kind == OperandKind::Helper ? 's'
                                                    : 'c';
  return prefix + std::to_string(index);
}

bool VirtualInstruction::touchesHelper() const noexcept {
  return std::any_of(operands.begin(), operands.end(), [](const auto& o) {
    return o.kind == OperandKind::Helper;
  });
}

std::string VirtualInstruction::toString() const {
  std::string out(opcodeName(opcode));
  if (opcode == Opcode::RZ) {
    out += "(" + formatAngle(angle) + ")";
  }
  for (const auto& op : operands) {
    out += ' ';
    out += op.toString();
  }
  return out;
}

std::size_t computeDepth(std::span<const VirtualInstruction> instructions) {
  std::size_t maxData = 0;
  std::size_t maxHelper = 0;
  std::size_t maxClassical = 0;
  for (const auto& in : instructions) {
    for (const auto& op : in.operands) {
      auto& m = op.kind == OperandKind::Data     ? maxData
                : op.kind == OperandKind::Helper ? maxHelper
                                                 : maxClassical;
      m = std::max(m, op.index + 1);
    }
  }
  std::vector<std::size_t> dataLevel(maxData, 0);
  std::vector<std::size_t> helperLevel(maxHelper, 0);
  std::vector<std::size_t> classicalLevel(maxClassical, 0);
  auto level = [&](const VirtualOperand& op) -> std::size_t& {
    switch (op.kind) {
    case OperandKind::Data:
      return dataLevel[op.index];
    case OperandKind::Helper:
      return helperLevel[op.index];
    default:
      return classicalLevel[op.index];
    }
  };

  std::size_t depth = 0;
  for (const auto& in : instructions) {
    if (in.opcode == Opcode::FreeHelper) {
      helperLevel[in.operands[0].index] = 0;
      continue;
    }
    std::size_t l = 0;
    for (const auto& op : in.operands) {
      l = std::max(l, level(op));
    }
    ++l;
    for (const auto& op : in.operands) {
      level(op) = l;
    }
    depth = std::max(depth, l);
  }
  return depth;
}

Process::Process(std::string id, std::size_t numData, std::size_t numHelper,
                 std::uint64_t shots,
                 std::vector<VirtualInstruction> instructions,
                 double arrivalTime)
    : id_(std::move(id)), numData_(numData), numHelper_(numHelper),
      shots_(shots), instructions_(std::move(instructions)),
      arrivalTime_(arrivalTime) {
  if (id_.empty() ||
      std::any_of(id_.begin(), id_.end(),
                  [](unsigned char c) { return std::isspace(c); })) {
    throw ProcessError("process id must be a non-empty token, got '" + id_ +
                       "'");
  }
  if (shots_ == 0) {
    throw ProcessError("process " + id_ + ": shots must be >= 1");
  }
  if (numData_ == 0) {
    throw ProcessError("process " + id_ + ": needs at least one data qubit");
  }
  HelperTracker helpers(numHelper_);
  for (std::size_t i = 0; i < instructions_.size(); ++i) {
    const auto& in = instructions_[i];
    auto err = checkShape(in, numData_, numHelper_);
    if (!err) {
      err = helpers.step(in);
    }
    if (err) {
      throw ProcessError("process " + id_ + ", instruction " +
                         std::to_string(i) + " (" + in.toString() +
                         "): " + *err);
    }
    for (const auto& op : in.operands) {
      if (op.kind == OperandKind::Classical) {
        numClassical_ = std::max(numClassical_, op.index + 1);
      }
    }
  }
  peakHelpers_ = helpers.peak;
  depth_ = computeDepth(instructions_);
}

std::size_t Process::gateCount() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(instructions_.begin(), instructions_.end(),
                    [](const auto& in) {
                      return in.opcode != Opcode::Measure &&
                             in.opcode != Opcode::FreeHelper;
                    }));
}

ProcessStats Process::stats() const noexcept {
  const std::uint64_t d = shots_ * depth_;
  return {d, d * numData_};
}

Process Process::withShots(std::uint64_t shots) const {
  Process p = *this;
  if (shots == 0) {
    throw ProcessError("process " + id_ + ": shots must be >= 1");
  }
  p.shots_ = shots;
  return p;
}

Process Process::withArrival(double arrivalTime) const {
  Process p = *this;
  p.arrivalTime_ = arrivalTime;
  return p;
}

Process parseProcess(std::string_view text) {
  std::optional<std::string> id;
  std::optional<std::uint64_t> shots;
  std::optional<std::size_t> numData;
  std::size_t numHelper = 0;
  double arrival = 0.0;
  std::vector<VirtualInstruction> instrs;
  std::vector<std::size_t> instrLines;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineNo = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw ProcessError("line " + std::to_string(lineNo) + ": " + msg, lineNo);
  };

  while (std::getline(in, raw)) {
    ++lineNo;
    if (const auto hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    std::istringstream ls(raw);
    std::vector<std::string> toks;
    for (std::string t; ls >> t;) {
      toks.push_back(t);
    }
    if (toks.empty()) {
      continue;
    }
    const auto key = upper(toks[0]);
    const bool header = key == "PROC" || key == "SHOTS" || key == "DATA" ||
                        key == "HELPER" || key == "ARRIVAL";
    if (header) {
      if (!instrs.empty()) {
        fail("header '" + toks[0] + "' after the first instruction");
      }
      if (toks.size() != 2) {
        fail("header '" + toks[0] + "' takes exactly one value");
      }
      if (key == "PROC") {
        id = toks[1];
      } else if (key == "SHOTS") {
        shots = parseCount(toks[1], "shots", lineNo);
      } else if (key == "DATA") {
        numData = parseCount(toks[1], "data", lineNo);
      } else if (key == "HELPER") {
        numHelper = parseCount(toks[1], "helper", lineNo);
      } else {
        try {
          std::size_t used = 0;
          arrival = std::stod(toks[1], &used);
          if (used != toks[1].size() || arrival < 0) {
            throw std::invalid_argument("trailing");
          }
        } catch (const std::exception&) {
          fail("'arrival' expects a non-negative number");
        }
      }
      continue;
    }
    if (key == "FREE_DATA" || key == "DEALLOCATE_DATA") {
      fail("data qubits are released implicitly at process end; mid-circuit "
           "data release is not supported");
    }
    if (!id || !shots || !numData) {
      fail(std::string("missing header before first instruction (need ") +
           (!id ? "proc " : "") + (!shots ? "shots " : "") +
           (!numData ? "data" : "") + ")");
    }

    VirtualInstruction instr{};
    auto opText = toks[0];
    if (const auto paren = opText.find('('); paren != std::string::npos) {
      if (opText.back() != ')') {
        fail("malformed parameter list in '" + opText + "'");
      }
      const auto param = opText.substr(paren + 1, opText.size() - paren - 2);
      opText = opText.substr(0, paren);
      try {
        std::size_t used = 0;
        instr.angle = std::stod(param, &used);
        if (used != param.size()) {
          throw std::invalid_argument("trailing");
        }
      } catch (const std::exception&) {
        fail("bad angle '" + param + "'");
      }
    }
    const auto op = opcodeFromName(opText);
    if (!op) {
      fail("unknown opcode '" + opText + "'");
    }
    instr.opcode = *op;
    if (instr.opcode != Opcode::RZ && toks[0].find('(') != std::string::npos) {
      fail(opText + " takes no parameter");
    }
    if (instr.opcode == Opcode::RZ && toks[0].find('(') == std::string::npos) {
      fail("RZ needs an angle: RZ(<theta>)");
    }
    for (std::size_t i = 1; i < toks.size(); ++i) {
      instr.operands.push_back(parseOperand(toks[i], lineNo));
    }
    if (auto err = checkShape(instr, *numData, numHelper)) {
      fail(*err);
    }
    instrs.push_back(std::move(instr));
    instrLines.push_back(lineNo);
  }
  if (!id || !shots || !numData) {
    fail(std::string("missing header (need ") + (!id ? "proc " : "") +
         (!shots ? "shots " : "") + (!numData ? "data" : "") + ")");
  }

  HelperTracker helpers(numHelper);
  for (std::size_t i = 0; i < instrs.size(); ++i) {
    if (auto err = helpers.step(instrs[i])) {
      lineNo = instrLines[i];
      fail(*err);
    }
  }
  try {
    return {*id, *numData, numHelper, *shots, std::move(instrs), arrival};
  } catch (const ProcessError& e) {
    throw ProcessError(e.what(), 0);
  }
}

Process loadProcess(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ProcessError("cannot open process file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parseProcess(ss.str());
  } catch (const ProcessError& e) {
    throw ProcessError(path + ": " + e.what(), e.line());
  }
}

std::string serializeProcess(const Process& p) {
  std::ostringstream out;
  out << "proc " << p.id() << '\n';
  out << "shots " << p.shots() << '\n';
  out << "data " << p.numData() << '\n';
  out << "helper " << p.numHelper() << '\n';
  if (p.arrivalTime() != 0.0) {
    out << "arrival " << formatAngle(p.arrivalTime()) << '\n';
  }
  for (const auto& in : p.instructions()) {
    out << in.toString() << '\n';
  }
  return out.str();
}

} // namespace qmux
