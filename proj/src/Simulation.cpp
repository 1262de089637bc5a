#include "qmux/Simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace qmux {

using nlohmann::json;

namespace {

json optionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) {
    throw std::runtime_error("cannot open '" + p.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string batchName(std::size_t index, std::string_view ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03zu", index);
  return std::string(buf) + std::string(ext);
}

std::string csvNumber(const std::optional<double>& v) {
  if (!v) {
    return "";
  }
  std::ostringstream out;
  out << std::setprecision(10) << *v;
  return out.str();
}

json costJson(const CostBreakdown& c) {
  return {{"intro", c.intro},
          {"inter", c.inter},
          {"hrcost", c.hrcost},
          {"total", c.total}};
}

CostBreakdown costFromJson(const json& j) {
  return {j.at("intro").get<double>(), j.at("inter").get<double>(),
          j.at("hrcost").get<double>(), j.at("total").get<double>()};
}

} // namespace

void RunConfig::validate() const {
  SchedulerConfig s = scheduler;
  s.totalQubits = std::max<std::size_t>(s.totalQubits, 1);
  s.validate();
  weights.validate();
  if (workloadDir.empty()) {
    workload.validate();
  }
  if (!(depthTime > 0.0)) {
    throw std::invalid_argument("depth time must be > 0");
  }
  if (!(anneal.cooling > 0.0 && anneal.cooling < 1.0)) {
    throw std::invalid_argument("cooling factor must lie in (0, 1)");
  }
  if (anneal.restarts == 0) {
    throw std::invalid_argument("annealing restarts must be >= 1");
  }
}

void to_json(json& j, const RunConfig& c) {
  j = json{
      {"topology", c.topology},
      {"scheduler",
       {{"lambda", c.scheduler.lambda},
        {"max_shots", c.scheduler.maxShots},
        {"wait_bound", c.scheduler.waitBound},
        {"total_qubits", c.scheduler.totalQubits},
        {"fill", c.scheduler.fill == BatchFill::UntilThreshold
                     ? "threshold"
                     : "capacity"}}},
      {"weights",
       {{"alpha", c.weights.alpha},
        {"beta", c.weights.beta},
        {"gamma", c.weights.gamma}}},
      {"anneal",
       {{"iterations", c.anneal.iterations},
        {"moves_per_iteration", c.anneal.movesPerIteration},
        {"initial_temperature", c.anneal.initialTemperature},
        {"cooling", c.anneal.cooling},
        {"restarts", c.anneal.restarts}}},
      {"sharing", c.sharing},
      {"shot_aware", c.shotAware},
      {"workload", c.workload},
      {"workload_dir", c.workloadDir},
      {"seed", c.seed},
      {"depth_time", c.depthTime}};
}

void from_json(const json& j, RunConfig& c) {
  c = RunConfig{};
  c.topology = j.value("topology", c.topology);
  if (j.contains("scheduler")) {
    const auto& s = j.at("scheduler");
    c.scheduler.lambda = s.value("lambda", c.scheduler.lambda);
    c.scheduler.maxShots = s.value("max_shots", c.scheduler.maxShots);
    c.scheduler.waitBound = s.value("wait_bound", c.scheduler.waitBound);
    c.scheduler.totalQubits = s.value("total_qubits", c.scheduler.totalQubits);
    const auto fill = s.value("fill", std::string("threshold"));
    if (fill == "threshold") {
      c.scheduler.fill = BatchFill::UntilThreshold;
    } else if (fill == "capacity") {
      c.scheduler.fill = BatchFill::UntilCapacity;
    } else {
      throw std::invalid_argument("unknown batch fill '" + fill + "'");
    }
  }
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    c.weights.alpha = w.value("alpha", c.weights.alpha);
    c.weights.beta = w.value("beta", c.weights.beta);
    c.weights.gamma = w.value("gamma", c.weights.gamma);
  }
  if (j.contains("anneal")) {
    const auto& a = j.at("anneal");
    c.anneal.iterations = a.value("iterations", c.anneal.iterations);
    c.anneal.movesPerIteration =
        a.value("moves_per_iteration", c.anneal.movesPerIteration);
    c.anneal.initialTemperature =
        a.value("initial_temperature", c.anneal.initialTemperature);
    c.anneal.cooling = a.value("cooling", c.anneal.cooling);
    c.anneal.restarts = a.value("restarts", c.anneal.restarts);
  }
  c.sharing = j.value("sharing", c.sharing);
  c.shotAware = j.value("shot_aware", c.shotAware);
  if (j.contains("workload")) {
    c.workload = j.at("workload").get<WorkloadSpec>();
  }
  c.workloadDir = j.value("workload_dir", c.workloadDir);
  c.seed = j.value("seed", c.seed);
  c.depthTime = j.value("depth_time", c.depthTime);
}

std::size_t BatchRecord::maxDepth() const {
  std::size_t d = 0;
  for (const auto& m : members) {
    d = std::max(d, m.depth);
  }
  return d;
}

std::uint64_t BatchRecord::makespan() const { return shots * maxDepth(); }

std::uint64_t BatchRecord::capacity() const {
  return totalQubits * makespan();
}

std::uint64_t BatchRecord::work() const {
  std::uint64_t w = 0;
  for (const auto& m : members) {
    w += static_cast<std::uint64_t>(m.numData) * m.depth;
  }
  return w * shots;
}

json recordToJson(const BatchRecord& r) {
  json members = json::array();
  for (const auto& m : r.members) {
    members.push_back({{"id", m.id},
                       {"data", m.numData},
                       {"helper", m.numHelper},
                       {"depth", m.depth},
                       {"arrival_time", m.arrival},
                       {"remaining_before", m.remainingBefore}});
  }
  json log = json::array();
  for (const auto& ev : r.program.bindingLog) {
    log.push_back({ev.seq, ev.owner, ev.helper, ev.episode, ev.physical,
                   ev.kind == BindingEvent::Kind::Bind ? "bind" : "release"});
  }
  const auto share = shareRatio(r.program);
  return {{"schema", kSchemaVersion},
          {"index", r.index},
          {"start_time", r.startTime},
          {"end_time", r.endTime},
          {"reason", reasonName(r.reason)},
          {"shots", r.shots},
          {"total_qubits", r.totalQubits},
          {"makespan", r.makespan()},
          {"capacity", r.capacity()},
          {"work", r.work()},
          {"members", members},
          {"evicted", r.evicted},
          {"layout", r.layout.allSites()},
          {"cost", costJson(r.cost)},
          {"initial_cost", costJson(r.initialCost)},
          {"anneal_seed", r.annealSeed},
          {"process_ids", r.program.processIds},
          {"data_qubits", r.program.dataQubits},
          {"helper_zone", r.program.helperZone},
          {"binding_log", log},
          {"utilization", batchUtilization(r.program, r.totalQubits)},
          {"share_ratio", share.value},
          {"hr_ratio", optionalJson(hrRatio(r.cost))}};
}

BatchRecord recordFromJson(const json& j, std::string_view stream) {
  if (j.value("schema", 0) != kSchemaVersion) {
    throw std::runtime_error("unsupported batch record schema");
  }
  BatchRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.startTime = j.at("start_time").get<double>();
  r.endTime = j.at("end_time").get<double>();
  r.reason = j.at("reason").get<std::string>() == "timeout"
                 ? FormationReason::Timeout
                 : FormationReason::Threshold;
  r.shots = j.at("shots").get<std::uint64_t>();
  r.totalQubits = j.at("total_qubits").get<std::size_t>();
  for (const auto& m : j.at("members")) {
    r.members.push_back({m.at("id").get<std::string>(),
                         m.at("data").get<std::size_t>(),
                         m.at("helper").get<std::size_t>(),
                         m.at("depth").get<std::size_t>(),
                         m.at("arrival_time").get<double>(),
                         m.at("remaining_before").get<std::uint64_t>()});
  }
  r.evicted = j.at("evicted").get<std::vector<std::string>>();
  r.layout = Layout(r.totalQubits,
                    j.at("layout").get<std::vector<std::vector<PhysicalQubit>>>());
  r.cost = costFromJson(j.at("cost"));
  r.initialCost = costFromJson(j.at("initial_cost"));
  r.annealSeed = j.at("anneal_seed").get<std::uint64_t>();
  auto& sp = r.program;
  sp.processIds = j.at("process_ids").get<std::vector<std::string>>();
  sp.dataQubits =
      j.at("data_qubits").get<std::vector<std::vector<PhysicalQubit>>>();
  sp.helperZone = j.at("helper_zone").get<std::vector<PhysicalQubit>>();
  for (const auto& ev : j.at("binding_log")) {
    sp.bindingLog.push_back({ev.at(0).get<std::size_t>(),
                             ev.at(1).get<std::size_t>(),
                             ev.at(2).get<std::size_t>(),
                             ev.at(3).get<std::size_t>(),
                             ev.at(4).get<PhysicalQubit>(),
                             ev.at(5).get<std::string>() == "bind"
                                 ? BindingEvent::Kind::Bind
                                 : BindingEvent::Kind::Release});
  }
  sp.instructions = parseStream(stream, sp.processIds);
  sp.completed.assign(sp.processIds.size(), false);
  for (std::size_t p = 0; p < sp.processIds.size(); ++p) {
    sp.completed[p] = std::find(r.evicted.begin(), r.evicted.end(),
                                sp.processIds[p]) == r.evicted.end();
  }
  return r;
}

std::vector<HardwareInstruction>
parseStream(std::string_view text, std::span<const std::string> processIds) {
  std::map<std::string, std::size_t, std::less<>> owners;
  for (std::size_t i = 0; i < processIds.size(); ++i) {
    owners.emplace(processIds[i], i);
  }
  std::vector<HardwareInstruction> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  auto bad = [&](const std::string& why) {
    return std::runtime_error("stream line " + std::to_string(lineNo) + ": " +
                              why);
  };
  auto number = [&](std::string_view tok) {
    std::size_t v = 0;
    const auto [ptr, ec] =
        std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
      throw bad("expected a number, got '" + std::string(tok) + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) {
      continue;
    }
    std::istringstream ls(line);
    std::string seq;
    std::string owner;
    std::string op;
    ls >> seq >> owner >> op;
    if (op.empty()) {
      throw bad("expected '<seq> <owner> <opcode> ...'");
    }
    HardwareInstruction hi;
    hi.seq = number(seq);
    if (owner == "SYSTEM") {
      hi.owner = kSystemOwner;
    } else {
      const auto it = owners.find(owner);
      if (it == owners.end()) {
        throw bad("unknown owner '" + owner + "'");
      }
      hi.owner = it->second;
    }
    const auto paren = op.find('(');
    if (paren != std::string::npos) {
      if (op.back() != ')') {
        throw bad("malformed angle in '" + op + "'");
      }
      const auto arg = op.substr(paren + 1, op.size() - paren - 2);
      const auto [ptr, ec] =
          std::from_chars(arg.data(), arg.data() + arg.size(), hi.angle);
      if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
        throw bad("malformed angle in '" + op + "'");
      }
      op.resize(paren);
    }
    if (op == "RESET") {
      hi.opcode = Opcode::Reset;
    } else if (const auto code = opcodeFromName(op)) {
      hi.opcode = *code;
    } else {
      throw bad("unknown opcode '" + op + "'");
    }
    std::string tok;
    while (ls >> tok) {
      if (tok.front() == 'c') {
        hi.classical = number(std::string_view(tok).substr(1));
      } else {
        hi.qubits.push_back(static_cast<PhysicalQubit>(number(tok)));
      }
    }
    out.push_back(std::move(hi));
  }
  return out;
}

MetricsReport computeMetrics(std::span<const BatchRecord> batches) {
  MetricsReport m;
  m.batches = batches.size();
  if (batches.empty()) {
    return m;
  }
  double util = 0.0;
  double share = 0.0;
  double intro = 0.0;
  double hr = 0.0;
  std::uint64_t work = 0;
  std::uint64_t cap = 0;
  std::vector<std::size_t> counts;
  for (const auto& b : batches) {
    util += batchUtilization(b.program, b.totalQubits);
    share += shareRatio(b.program).value;
    intro += b.cost.intro;
    hr += b.cost.hrcost;
    work += b.work();
    cap += b.capacity();
    counts.push_back(b.members.size());
  }
  const auto n = static_cast<double>(batches.size());
  m.spaceUtilization = util / n;
  m.shareRatio = share / n;
  if (cap > 0) {
    m.eta = static_cast<double>(work) / static_cast<double>(cap);
  }
  m.ppb = processesPerBatch(counts);
  m.hrRatio = hrRatio({intro, 0.0, hr, 0.0});
  return m;
}

json makeReport(const RunConfig& config, std::span<const BatchRecord> batches) {
  const auto m = computeMetrics(batches);
  // turnaround of every process whose last shot ran in this run
  double turnaround = 0.0;
  std::size_t finished = 0;
  double end = 0.0;
  for (const auto& b : batches) {
    end = std::max(end, b.endTime);
    for (const auto& mem : b.members) {
      if (mem.remainingBefore <= b.shots) {
        turnaround += b.endTime - mem.arrival;
        ++finished;
      }
    }
  }
  return {{"schema", kSchemaVersion},
          {"lambda", config.scheduler.lambda},
          {"sharing", config.sharing},
          {"shot_aware", config.shotAware},
          {"batches", m.batches},
          {"completed_processes", finished},
          {"end_time", end},
          {"mean_turnaround",
           finished ? json(turnaround / static_cast<double>(finished))
                    : json(nullptr)},
          {"metrics",
           {{"space_utilization", optionalJson(m.spaceUtilization)},
            {"share_ratio", optionalJson(m.shareRatio)},
            {"eta", optionalJson(m.eta)},
            {"ppb", optionalJson(m.ppb)},
            {"hr_ratio", optionalJson(m.hrRatio)},
            {"fidelity", optionalJson(m.fidelity)}}}};
}

SimulationResult simulate(const RunConfig& config) {
  if (!config.workloadDir.empty()) {
    return simulate(config, readWorkload(config.workloadDir));
  }
  return simulate(config, generateWorkload(config.workload));
}

namespace {

/// Arrival admission and batch formation shared by planBatches and simulate.
class QueueDriver {
public:
  QueueDriver(const RunConfig& config, std::vector<Job>& jobs,
              const SchedulerConfig& cfg, std::vector<SkippedJob>& skipped,
              std::vector<std::string>& log)
      : config_(config), jobs_(jobs), cfg_(cfg), skipped_(skipped),
        log_(log) {
    std::stable_sort(jobs_.begin(), jobs_.end(),
                     [](const Job& a, const Job& b) {
                       return a.process->arrivalTime() <
                              b.process->arrivalTime();
                     });
  }

  [[nodiscard]] double now() const noexcept { return now_; }

  /// Advances the clock until a batch forms; nothing once all work is done.
  std::optional<Batch> nextBatch() {
    while (next_ < jobs_.size() || !queue_.empty()) {
      admitUpTo(now_);
      if (queue_.empty()) {
        now_ = jobs_[next_].process->arrivalTime();
        continue;
      }
      const auto ordered =
          config_.shotAware ? prioritize(queue_) : arrivalOrder(queue_);
      if (auto batch = formBatch(ordered, cfg_, now_)) {
        return batch;
      }
      double oldest = std::numeric_limits<double>::infinity();
      for (const auto& e : queue_) {
        oldest = std::min(oldest, e.arrival());
      }
      double wake = oldest + cfg_.waitBound;
      if (next_ < jobs_.size()) {
        wake = std::min(wake, jobs_[next_].process->arrivalTime());
      }
      now_ = std::max(now_, wake);
    }
    return std::nullopt;
  }

  /// Charges the executed batch and advances the clock by its makespan.
  void settle(const Batch& batch) {
    queue_ = settleBatch(batch, std::move(queue_));
    now_ += static_cast<double>(batch.makespan()) * config_.depthTime;
  }

private:
  void admitUpTo(double t) {
    const auto q = cfg_.totalQubits;
    for (; next_ < jobs_.size() && jobs_[next_].process->arrivalTime() <= t;
         ++next_) {
      const auto& p = jobs_[next_].process;
      try {
        auto entry = admit(p, q, config_.sharing);
        if (config_.sharing && p->peakHelperDemand() > q - p->numData()) {
          throw AdmissionError(
              "process " + p->id() + " needs " +
              std::to_string(p->peakHelperDemand()) +
              " helpers at once, more than the device can ever offer");
        }
        queue_.push_back(std::move(entry));
      } catch (const AdmissionError& e) {
        skipped_.push_back({p->id(), e.what()});
        log_.push_back(std::string("skipped: ") + e.what());
      }
    }
  }

  const RunConfig& config_;
  std::vector<Job>& jobs_;
  const SchedulerConfig& cfg_;
  std::vector<SkippedJob>& skipped_;
  std::vector<std::string>& log_;
  std::vector<QueueEntry> queue_;
  std::size_t next_ = 0;
  double now_ = 0.0;
};

std::size_t topologySize(const RunConfig& config) {
  return loadTopology(config.topology).numQubits();
}

} // namespace

std::vector<PlannedBatch> planBatches(const RunConfig& config,
                                      std::vector<Job> jobs,
                                      std::vector<SkippedJob>* skipped) {
  config.validate();
  auto cfg = config.scheduler;
  cfg.totalQubits = topologySize(config);
  std::vector<SkippedJob> dropped;
  std::vector<std::string> log;
  QueueDriver driver(config, jobs, cfg, dropped, log);
  std::vector<PlannedBatch> plan;
  while (auto batch = driver.nextBatch()) {
    const double start = driver.now();
    driver.settle(*batch);
    plan.push_back({std::move(*batch), start, driver.now()});
  }
  if (skipped) {
    *skipped = std::move(dropped);
  }
  return plan;
}

SimulationResult simulate(const RunConfig& config, std::vector<Job> jobs) {
  config.validate();
  const auto g = loadTopology(config.topology);
  SimulationResult result;
  result.config = config;
  result.config.scheduler.totalQubits = g.numQubits();
  const auto& cfg = result.config.scheduler;
  const auto q = g.numQubits();

  QueueDriver driver(result.config, jobs, cfg, result.skipped, result.log);
  while (auto batch = driver.nextBatch()) {
    BatchRecord rec;
    rec.index = result.batches.size();
    rec.startTime = driver.now();
    rec.reason = batch->reason;
    rec.totalQubits = q;

    auto& members = batch->members;
    if (config.sharing) {
      // the helper zone is whatever the data regions leave free
      while (true) {
        const auto zone = q - Batch{members, 0, {}, q}.footprint();
        auto it = std::find_if(members.rbegin(), members.rend(),
                               [&](const QueueEntry& e) {
                                 return e.process->peakHelperDemand() > zone;
                               });
        if (it == members.rend()) {
          break;
        }
        rec.evicted.push_back(it->id());
        result.log.push_back("batch " + std::to_string(rec.index) +
                             ": evicted " + it->id() +
                             " (helper demand exceeds the helper zone)");
        members.erase(std::next(it).base());
      }
    }

    std::vector<ProcessPtr> procs;
    std::vector<PlacementDemand> demands;
    for (const auto& m : members) {
      procs.push_back(m.process);
      demands.push_back(placementDemand(*m.process, !config.sharing));
    }
    auto params = config.anneal;
    params.seed = config.seed * 1'000'003ULL + rec.index;
    auto placed = placeBatch(g, demands, config.weights, params);
    auto program = scheduleInstructions(
        procs, placed.layout, g,
        config.sharing ? HelperMode::Shared : HelperMode::Exclusive);
    for (const auto& id : program.evicted) {
      result.log.push_back("batch " + std::to_string(rec.index) +
                           ": evicted " + id + " to resolve a helper deadlock");
    }
    if (const auto iso = verifyIsolation(program); !iso.ok) {
      throw std::logic_error("batch " + std::to_string(rec.index) +
                             " failed isolation: " + iso.message);
    }

    std::vector<QueueEntry> ran;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (program.completed[i]) {
        ran.push_back(members[i]);
      } else {
        rec.evicted.push_back(members[i].id());
      }
    }
    batch->members = ran;
    batch->shots = batchShots(ran, cfg);
    rec.shots = batch->shots;
    for (const auto& m : ran) {
      rec.members.push_back({m.id(), m.numData(), m.process->numHelper(),
                             m.depth(), m.arrival(), m.remainingShots});
    }
    rec.layout = placed.layout;
    rec.cost = placed.cost;
    rec.initialCost = placed.initialCost;
    rec.annealSeed = placed.seed;
    rec.program = std::move(program);

    driver.settle(*batch);
    rec.endTime = driver.now();
    result.batches.push_back(std::move(rec));
  }
  result.jobs = std::move(jobs);
  result.report = makeReport(result.config, result.batches);
  return result;
}

void writeRunDirectory(const SimulationResult& result,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "batches");
  std::filesystem::create_directories(dir / "streams");
  json jobs = json::array();
  for (const auto& job : result.jobs) {
    jobs.push_back({{"id", job.process->id()},
                    {"arrival_time", job.process->arrivalTime()},
                    {"family", familyName(job.params.family)},
                    {"params", job.params.args},
                    {"shots", job.process->shots()},
                    {"process", serializeProcess(*job.process)}});
  }
  json skipped = json::array();
  for (const auto& s : result.skipped) {
    skipped.push_back({{"id", s.id}, {"reason", s.reason}});
  }
  const json manifest = {{"schema", kSchemaVersion},
                         {"config", result.config},
                         {"jobs", jobs},
                         {"skipped", skipped},
                         {"log", result.log},
                         {"batches", result.batches.size()}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  for (const auto& b : result.batches) {
    std::ofstream(dir / "batches" / batchName(b.index, ".json"))
        << recordToJson(b).dump(2) << '\n';
    std::ofstream(dir / "streams" / batchName(b.index, ".txt"))
        << b.program.toText();
  }
  std::ofstream(dir / "report.json") << result.report.dump(2) << '\n';
}

std::vector<BatchRecord> readRunBatches(const std::filesystem::path& dir) {
  const auto manifest = json::parse(readFile(dir / "manifest.json"));
  const auto count = manifest.at("batches").get<std::size_t>();
  std::vector<BatchRecord> batches;
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = json::parse(readFile(dir / "batches" / batchName(i, ".json")));
    batches.push_back(
        recordFromJson(j, readFile(dir / "streams" / batchName(i, ".txt"))));
  }
  return batches;
}

json reportFromRunDirectory(const std::filesystem::path& dir) {
  const auto manifest = json::parse(readFile(dir / "manifest.json"));
  if (manifest.value("schema", 0) != kSchemaVersion) {
    throw std::runtime_error("unsupported manifest schema in '" +
                             dir.string() + "'");
  }
  const auto config = manifest.at("config").get<RunConfig>();
  const auto batches = readRunBatches(dir);
  return makeReport(config, batches);
}

SimulationResult replayManifest(const std::filesystem::path& manifestPath) {
  const auto manifest = json::parse(readFile(manifestPath));
  if (manifest.value("schema", 0) != kSchemaVersion) {
    throw std::runtime_error("unsupported manifest schema in '" +
                             manifestPath.string() + "'");
  }
  const auto config = manifest.at("config").get<RunConfig>();
  std::vector<Job> jobs;
  for (const auto& j : manifest.at("jobs")) {
    auto p = parseProcess(j.at("process").get<std::string>());
    FamilyParams params{familyFromName(j.at("family").get<std::string>()),
                        j.at("params").get<std::vector<std::size_t>>()};
    jobs.push_back({std::make_shared<const Process>(std::move(p)), params});
  }
  return simulate(config, std::move(jobs));
}

std::string batchCsv(const RunConfig& config,
                     std::span<const BatchRecord> batches) {
  std::ostringstream out;
  out << "batch,lambda,utilization,share_ratio,ppb,eta,hr_ratio,makespan\n";
  for (const auto& b : batches) {
    const auto cap = b.capacity();
    std::optional<double> eta;
    if (cap > 0) {
      eta = static_cast<double>(b.work()) / static_cast<double>(cap);
    }
    out << b.index << ',' << csvNumber(config.scheduler.lambda) << ','
        << csvNumber(batchUtilization(b.program, b.totalQubits)) << ','
        << csvNumber(shareRatio(b.program).value) << ',' << b.members.size()
        << ',' << csvNumber(eta) << ',' << csvNumber(hrRatio(b.cost)) << ','
        << b.makespan() << '\n';
  }
  return out.str();
}

std::vector<SweepRow> ablationSweep(const RunConfig& base,
                                    std::span<const double> lambdas) {
  const auto jobs = base.workloadDir.empty() ? generateWorkload(base.workload)
                                             : readWorkload(base.workloadDir);
  std::vector<std::future<SweepRow>> futures;
  for (const auto lambda : lambdas) {
    for (const bool sharing : {false, true}) {
      for (const bool shotAware : {false, true}) {
        auto cfg = base;
        cfg.scheduler.lambda = lambda;
        cfg.sharing = sharing;
        cfg.shotAware = shotAware;
        cfg.validate();
        futures.push_back(std::async(std::launch::async, [cfg, &jobs] {
          const auto r = simulate(cfg, jobs);
          return SweepRow{cfg.scheduler.lambda, cfg.sharing, cfg.shotAware,
                          r.batches.size(), computeMetrics(r.batches)};
        }));
      }
    }
  }
  std::vector<SweepRow> rows;
  for (auto& f : futures) {
    rows.push_back(f.get());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.lambda, a.sharing, a.shotAware) <
           std::tie(b.lambda, b.sharing, b.shotAware);
  });
  return rows;
}

std::string sweepCsv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "lambda,sharing,shot_aware,batches,space_utilization,share_ratio,"
         "eta,ppb,hr_ratio\n";
  for (const auto& r : rows) {
    out << csvNumber(r.lambda) << ',' << (r.sharing ? "on" : "off") << ','
        << (r.shotAware ? "on" : "off") << ',' << r.batches << ','
        << csvNumber(r.metrics.spaceUtilization) << ','
        << csvNumber(r.metrics.shareRatio) << ',' << csvNumber(r.metrics.eta)
        << ',' << csvNumber(r.metrics.ppb) << ','
        << csvNumber(r.metrics.hrRatio) << '\n';
  }
  return out.str();
}

} // namespace qmux
