#include "qmux/Workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

namespace qmux {

namespace {

using Instrs = std::vector<VirtualInstruction>;

void gate1(Instrs& out, Opcode op, VirtualOperand q, double angle = 0.0) {
  out.push_back({op, {q}, angle});
}

void gate2(Instrs& out, Opcode op, VirtualOperand a, VirtualOperand b) {
  out.push_back({op, {a, b}});
}

void tdg(Instrs& out, VirtualOperand q) {
  gate1(out, Opcode::RZ, q, -std::numbers::pi / 4);
}

/// Clifford+T Toffoli, 6 CX.
void toffoli(Instrs& out, VirtualOperand a, VirtualOperand b,
             VirtualOperand t) {
  gate1(out, Opcode::H, t);
  gate2(out, Opcode::CX, b, t);
  tdg(out, t);
  gate2(out, Opcode::CX, a, t);
  gate1(out, Opcode::T, t);
  gate2(out, Opcode::CX, b, t);
  tdg(out, t);
  gate2(out, Opcode::CX, a, t);
  gate1(out, Opcode::T, b);
  gate1(out, Opcode::T, t);
  gate1(out, Opcode::H, t);
  gate2(out, Opcode::CX, a, b);
  gate1(out, Opcode::T, a);
  tdg(out, b);
  gate2(out, Opcode::CX, a, b);
}

void freeHelper(Instrs& out, std::size_t i) {
  out.push_back({Opcode::FreeHelper, {helper(i)}});
}

void measureData(Instrs& out, std::size_t numData, std::size_t firstBit) {
  for (std::size_t i = 0; i < numData; ++i) {
    out.push_back({Opcode::Measure, {data(i), classical(firstBit + i)}});
  }
}

void requireArgs(const FamilyParams& p, std::size_t n) {
  if (p.args.size() != n) {
    throw ProcessError(std::string(familyName(p.family)) + " takes " +
                       std::to_string(n) + " size parameter(s), got " +
                       std::to_string(p.args.size()));
  }
}

struct Shape {
  std::size_t numData;
  std::size_t numHelper;
  Instrs instrs;
};

Shape buildMcx(std::size_t n) {
  if (n < 2) {
    throw ProcessError("mcx needs at least 2 controls, got " +
                       std::to_string(n));
  }
  Instrs out;
  const auto target = data(n);
  for (std::size_t i = 0; i < n; ++i) {
    gate1(out, Opcode::H, data(i));
  }
  toffoli(out, data(0), data(1), helper(0));
  for (std::size_t i = 2; i < n; ++i) {
    toffoli(out, data(i), helper(i - 2), helper(i - 1));
  }
  gate2(out, Opcode::CX, helper(n - 2), target);
  for (std::size_t i = n - 1; i >= 2; --i) {
    toffoli(out, data(i), helper(i - 2), helper(i - 1));
    freeHelper(out, i - 1);
  }
  toffoli(out, data(0), data(1), helper(0));
  freeHelper(out, 0);
  measureData(out, n + 1, 0);
  return {n + 1, n - 1, std::move(out)};
}

Shape buildRandom(std::size_t d, std::size_t h, std::size_t g,
                  std::mt19937_64& rng) {
  if (d == 0) {
    throw ProcessError("random needs at least one data qubit");
  }
  if (g < h) {
    throw ProcessError("random(" + std::to_string(d) + "," +
                       std::to_string(h) + "," + std::to_string(g) +
                       "): gate count must cover every helper");
  }
  const auto total = d + h;
  auto qubit = [&](std::size_t k) { return k < d ? data(k) : helper(k - d); };
  std::uniform_int_distribution<std::size_t> pickData(0, d - 1);
  std::uniform_int_distribution<std::size_t> pickAny(0, total - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  constexpr std::array kOneQubit{Opcode::H, Opcode::X, Opcode::S, Opcode::T,
                                 Opcode::Z};

  Instrs gates;
  for (std::size_t k = 0; k < g; ++k) {
    if (k < h) {
      gate2(gates, Opcode::CX, data(pickData(rng)), helper(k));
      continue;
    }
    if (total < 2 || coin(rng) < 0.3) {
      const auto op = kOneQubit[rng() % kOneQubit.size()];
      gate1(gates, op, qubit(pickAny(rng)));
      continue;
    }
    const auto a = pickAny(rng);
    auto b = pickAny(rng);
    while (b == a) {
      b = pickAny(rng);
    }
    gate2(gates, coin(rng) < 0.8 ? Opcode::CX : Opcode::CZ, qubit(a),
          qubit(b));
  }

  std::vector<std::size_t> lastUse(h, 0);
  for (std::size_t k = 0; k < gates.size(); ++k) {
    for (const auto& op : gates[k].operands) {
      if (op.kind == OperandKind::Helper) {
        lastUse[op.index] = k;
      }
    }
  }
  Instrs out;
  for (std::size_t k = 0; k < gates.size(); ++k) {
    out.push_back(gates[k]);
    for (std::size_t s = 0; s < h; ++s) {
      if (lastUse[s] == k) {
        freeHelper(out, s);
      }
    }
  }
  measureData(out, d, 0);
  return {d, h, std::move(out)};
}

Shape buildStabilizer(std::size_t d, std::size_t rounds) {
  if (d < 2 || rounds == 0) {
    throw ProcessError("stabilizer needs >= 2 data qubits and >= 1 round");
  }
  Instrs out;
  for (std::size_t i = 0; i < d; ++i) {
    gate1(out, Opcode::H, data(i));
  }
  std::size_t bit = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t j = 0; j + 1 < d; ++j) {
      gate2(out, Opcode::CX, data(j), helper(j));
      gate2(out, Opcode::CX, data(j + 1), helper(j));
      out.push_back({Opcode::Measure, {helper(j), classical(bit++)}});
      freeHelper(out, j);
    }
  }
  measureData(out, d, bit);
  return {d, d - 1, std::move(out)};
}

Shape buildArithmetic(std::size_t vars, std::size_t depth,
                      std::mt19937_64& rng) {
  if (vars < 3 || depth == 0) {
    throw ProcessError("arithmetic needs >= 3 vars and depth >= 1");
  }
  const std::size_t scratch = std::max<std::size_t>(1, vars / 3);
  std::vector<std::size_t> perm(vars);
  std::iota(perm.begin(), perm.end(), 0);
  Instrs out;
  for (std::size_t layer = 0; layer < depth; ++layer) {
    std::shuffle(perm.begin(), perm.end(), rng);
    gate1(out, Opcode::X, data(perm[0]));
    for (std::size_t j = 0; j < scratch; ++j) {
      const auto a = data(perm[3 * j]);
      const auto b = data(perm[3 * j + 1]);
      const auto t = data(perm[3 * j + 2]);
      toffoli(out, a, b, helper(j));
      gate2(out, Opcode::CX, helper(j), t);
      toffoli(out, a, b, helper(j));
      freeHelper(out, j);
    }
  }
  measureData(out, vars, 0);
  return {vars, scratch, std::move(out)};
}

} // namespace

std::string_view familyName(Family f) noexcept {
  switch (f) {
  case Family::Random:
    return "random";
  case Family::Mcx:
    return "mcx";
  case Family::Stabilizer:
    return "stabilizer";
  case Family::Arithmetic:
    return "arithmetic";
  }
  return "?";
}

Family familyFromName(std::string_view name) {
  for (const auto f : kAllFamilies) {
    if (familyName(f) == name) {
      return f;
    }
  }
  if (name == "qec") {
    return Family::Stabilizer;
  }
  throw ProcessError("unknown benchmark family '" + std::string(name) + "'");
}

std::string FamilyParams::label() const {
  std::string out(familyName(family));
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    out += (i ? "," : "") + std::to_string(args[i]);
  }
  return out + ')';
}

Process generateFamily(const FamilyParams& params, std::uint64_t seed,
                       std::string id, std::uint64_t shots,
                       double arrivalTime) {
  std::mt19937_64 rng(seed);
  Shape shape;
  switch (params.family) {
  case Family::Random:
    requireArgs(params, 3);
    shape = buildRandom(params.args[0], params.args[1], params.args[2], rng);
    break;
  case Family::Mcx:
    requireArgs(params, 1);
    shape = buildMcx(params.args[0]);
    break;
  case Family::Stabilizer:
    requireArgs(params, 2);
    shape = buildStabilizer(params.args[0], params.args[1]);
    break;
  case Family::Arithmetic:
    requireArgs(params, 2);
    shape = buildArithmetic(params.args[0], params.args[1], rng);
    break;
  }
  if (id.empty()) {
    id = std::string(familyName(params.family));
    for (const auto a : params.args) {
      id += "_" + std::to_string(a);
    }
  }
  return {std::move(id),       shape.numData, shape.numHelper,
          shots,               std::move(shape.instrs), arrivalTime};
}

void WorkloadSpec::validate() const {
  if (!(arrivalRate > 0) || !(duration > 0)) {
    throw std::invalid_argument("workload rate and duration must be > 0");
  }
  if (shotsMin == 0 || shotsMin > shotsMax) {
    throw std::invalid_argument("workload shots need 1 <= min <= max");
  }
  if (std::any_of(mix.begin(), mix.end(), [](double w) { return w < 0; }) ||
      std::accumulate(mix.begin(), mix.end(), 0.0) <= 0) {
    throw std::invalid_argument(
        "family mix weights must be >= 0 and not all zero");
  }
  if (dataMin == 0 || dataMin > dataMax || helperMin > helperMax) {
    throw std::invalid_argument("workload size ranges need min <= max");
  }
}

std::array<double, 4> parseMix(std::string_view text) {
  std::array<double, 4> mix{0, 0, 0, 0};
  std::stringstream ss{std::string(text)};
  std::string tok;
  std::size_t pos = 0;
  while (std::getline(ss, tok, ',')) {
    const auto eq = tok.find('=');
    std::size_t slot = pos++;
    auto value = tok;
    if (eq != std::string::npos) {
      slot = static_cast<std::size_t>(familyFromName(tok.substr(0, eq)));
      value = tok.substr(eq + 1);
    }
    if (slot >= mix.size()) {
      throw std::invalid_argument("family mix has more than four weights");
    }
    mix[slot] = std::stod(value);
  }
  return mix;
}

void to_json(nlohmann::json& j, const WorkloadSpec& s) {
  j = nlohmann::json{{"arrival_rate", s.arrivalRate},
                     {"duration", s.duration},
                     {"shots_min", s.shotsMin},
                     {"shots_max", s.shotsMax},
                     {"mix", s.mix},
                     {"data_min", s.dataMin},
                     {"data_max", s.dataMax},
                     {"helper_min", s.helperMin},
                     {"helper_max", s.helperMax},
                     {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, WorkloadSpec& s) {
  s = WorkloadSpec{};
  s.arrivalRate = j.value("arrival_rate", s.arrivalRate);
  s.duration = j.value("duration", s.duration);
  s.shotsMin = j.value("shots_min", s.shotsMin);
  s.shotsMax = j.value("shots_max", s.shotsMax);
  s.mix = j.value("mix", s.mix);
  s.dataMin = j.value("data_min", s.dataMin);
  s.dataMax = j.value("data_max", s.dataMax);
  s.helperMin = j.value("helper_min", s.helperMin);
  s.helperMax = j.value("helper_max", s.helperMax);
  s.seed = j.value("seed", s.seed);
}

std::vector<Job> generateWorkload(const WorkloadSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::exponential_distribution<double> gap(spec.arrivalRate);
  std::discrete_distribution<std::size_t> pickFamily(spec.mix.begin(),
                                                     spec.mix.end());
  std::uniform_int_distribution<std::uint64_t> pickShots(spec.shotsMin,
                                                         spec.shotsMax);
  std::uniform_int_distribution<std::size_t> pickData(spec.dataMin,
                                                      spec.dataMax);
  std::uniform_int_distribution<std::size_t> pickHelper(spec.helperMin,
                                                        spec.helperMax);
  std::uniform_int_distribution<std::size_t> pickSmall(1, 3);

  std::vector<Job> jobs;
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= spec.duration) {
      break;
    }
    const auto family = kAllFamilies[pickFamily(rng)];
    const auto d = pickData(rng);
    FamilyParams params{family, {}};
    switch (family) {
    case Family::Random: {
      const auto h = pickHelper(rng);
      std::uniform_int_distribution<std::size_t> pickGates(2 * (d + h),
                                                           4 * (d + h));
      params.args = {d, h, pickGates(rng)};
      break;
    }
    case Family::Mcx:
      params.args = {std::max<std::size_t>(2, d - 1)};
      break;
    case Family::Stabilizer:
      params.args = {std::max<std::size_t>(2, d), pickSmall(rng)};
      break;
    case Family::Arithmetic:
      params.args = {std::max<std::size_t>(3, d), pickSmall(rng) + 1};
      break;
    }
    const auto shots = pickShots(rng);
    const auto familySeed = rng();
    char id[16];
    std::snprintf(id, sizeof id, "J%03zu", jobs.size());
    jobs.push_back({std::make_shared<const Process>(
                        generateFamily(params, familySeed, id, shots, t)),
                    params});
  }
  return jobs;
}

void writeWorkload(const std::filesystem::path& dir,
                   const std::vector<Job>& jobs, const nlohmann::json& extra) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest = extra;
  manifest["schema"] = 1;
  manifest["jobs"] = nlohmann::json::array();
  for (const auto& job : jobs) {
    const auto file = job.process->id() + ".proc";
    std::ofstream(dir / file) << serializeProcess(*job.process);
    manifest["jobs"].push_back({{"id", job.process->id()},
                                {"arrival_time", job.process->arrivalTime()},
                                {"family", familyName(job.params.family)},
                                {"params", job.params.args},
                                {"shots", job.process->shots()},
                                {"file", file}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

std::vector<Job> readWorkload(const std::filesystem::path& dir) {
  std::vector<Job> jobs;
  const auto manifestPath = dir / "manifest.json";
  if (std::filesystem::exists(manifestPath)) {
    std::ifstream in(manifestPath);
    const auto manifest = nlohmann::json::parse(in);
    for (const auto& j : manifest.at("jobs")) {
      auto p = loadProcess((dir / j.at("file").get<std::string>()).string());
      p = p.withArrival(j.at("arrival_time").get<double>());
      FamilyParams params{familyFromName(j.at("family").get<std::string>()),
                          j.at("params").get<std::vector<std::size_t>>()};
      jobs.push_back({std::make_shared<const Process>(std::move(p)), params});
    }
    return jobs;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".proc") {
      files.push_back(e.path());
    }
  }
  if (files.empty()) {
    throw ProcessError("no manifest.json or .proc files in '" + dir.string() +
                       "'");
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    jobs.push_back({std::make_shared<const Process>(loadProcess(f.string())),
                    FamilyParams{Family::Random, {}}});
  }
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
    return a.process->arrivalTime() < b.process->arrivalTime();
  });
  return jobs;
}

} // namespace qmux
