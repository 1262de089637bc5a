// qmux: command-line front end for workload generation, placement,
// instruction scheduling and end-to-end simulation.

#include "qmux/BatchScheduler.hpp"
#include "qmux/InstructionScheduler.hpp"
#include "qmux/Metrics.hpp"
#include "qmux/Process.hpp"
#include "qmux/Simulation.hpp"
#include "qmux/SpaceManager.hpp"
#include "qmux/Topology.hpp"
#include "qmux/Workload.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  /// Empty: each command picks its natural format.
  std::string format;
};

/// Options shared by simulate, run and sweep.
struct RunOptions {
  std::string topology = "heavyhex(15,7)";
  double lambda = 0.6;
  std::uint64_t maxShots = 8192;
  double waitBound = 10.0;
  std::string fill = "threshold";
  std::string sharing = "on";
  std::string shotAware = "on";
  double alpha = 0.5;
  double beta = 0.3;
  double gamma = 1.0;
  std::size_t iterations = 30;
  std::size_t moves = 0;
  std::size_t restarts = 1;
  double depthTime = 1e-3;
  double rate = 0.6;
  double duration = 40.0;
  std::uint64_t shotsMin = 500;
  std::uint64_t shotsMax = 8000;
  std::string mix = "1,1,1,1";
  std::size_t dataMin = 3;
  std::size_t dataMax = 12;
  std::size_t helperMin = 1;
  std::size_t helperMax = 8;
  std::string workloadDir;
};

void addWorkloadOptions(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--rate", o.rate, "Poisson arrival rate per second")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--duration", o.duration, "Arrival window in seconds")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--shots-min", o.shotsMin, "Smallest shot count");
  cmd->add_option("--shots-max", o.shotsMax, "Largest shot count");
  cmd->add_option("--mix", o.mix,
                  "Family weights: 'r,m,s,a' or 'mcx=3,random=1'");
  cmd->add_option("--data-min", o.dataMin, "Fewest data qubits per process");
  cmd->add_option("--data-max", o.dataMax, "Most data qubits per process");
  cmd->add_option("--helper-min", o.helperMin, "Fewest helpers (random family)");
  cmd->add_option("--helper-max", o.helperMax, "Most helpers (random family)");
}

void addRunOptions(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--topology", o.topology,
                  "line(n), grid(r,c), heavyhex(r,c), grid:r,c or an edge-list "
                  "file");
  cmd->add_option("--lambda", o.lambda, "Data-qubit occupancy ratio")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--max-shots", o.maxShots, "Largest shot count of a batch")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--wait-bound", o.waitBound,
                  "Seconds before an under-threshold batch is forced")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--fill", o.fill, "Batch fill: threshold or capacity")
      ->check(CLI::IsMember({"threshold", "capacity"}));
  cmd->add_option("--sharing", o.sharing, "Helper sharing: on or off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--shot-aware", o.shotAware,
                  "Depth-demand priority (on) or FIFO (off)")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--alpha", o.alpha, "Weight of the intra-process term")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--beta", o.beta, "Weight of the inter-process term")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--gamma", o.gamma, "Weight of the helper-routing term")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--iterations", o.iterations, "Annealing outer iterations");
  cmd->add_option("--moves", o.moves,
                  "Proposals per iteration (0: 100 x placed sites)");
  cmd->add_option("--restarts", o.restarts, "Independent annealing runs")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--depth-time", o.depthTime,
                  "Seconds per depth layer per shot")
      ->check(CLI::PositiveNumber);
  addWorkloadOptions(cmd, o);
}

qmux::WorkloadSpec workloadSpec(const RunOptions& o, std::uint64_t seed) {
  qmux::WorkloadSpec s;
  s.arrivalRate = o.rate;
  s.duration = o.duration;
  s.shotsMin = o.shotsMin;
  s.shotsMax = o.shotsMax;
  s.mix = qmux::parseMix(o.mix);
  s.dataMin = o.dataMin;
  s.dataMax = o.dataMax;
  s.helperMin = o.helperMin;
  s.helperMax = o.helperMax;
  s.seed = seed;
  return s;
}

qmux::RunConfig runConfig(const RunOptions& o, const Globals& g) {
  qmux::RunConfig c;
  c.topology = o.topology;
  c.scheduler.lambda = o.lambda;
  c.scheduler.maxShots = o.maxShots;
  c.scheduler.waitBound = o.waitBound;
  c.scheduler.fill = o.fill == "capacity" ? qmux::BatchFill::UntilCapacity
                                          : qmux::BatchFill::UntilThreshold;
  c.weights = {o.alpha, o.beta, o.gamma};
  c.anneal.iterations = o.iterations;
  c.anneal.movesPerIteration = o.moves;
  c.anneal.restarts = o.restarts;
  c.sharing = o.sharing == "on";
  c.shotAware = o.shotAware == "on";
  c.workload = workloadSpec(o, g.seed);
  c.workloadDir = o.workloadDir;
  c.seed = g.seed;
  c.depthTime = o.depthTime;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << text;
}

std::vector<qmux::ProcessPtr> loadProcesses(const std::vector<std::string>& files) {
  std::vector<qmux::ProcessPtr> procs;
  for (const auto& f : files) {
    procs.push_back(std::make_shared<const qmux::Process>(qmux::loadProcess(f)));
  }
  return procs;
}

void printRunSummary(const qmux::SimulationResult& r, const fs::path& dir) {
  for (const auto& line : r.log) {
    std::cerr << "qmux: " << line << '\n';
  }
  std::cerr << "qmux: " << r.batches.size() << " batches written to "
            << dir.string() << '\n';
}

/// Options of the single-batch commands, place and run.
struct PlaceOptions {
  std::string topology = "heavyhex(15,7)";
  std::vector<std::string> files;
  std::vector<double> weights{0.5, 0.3, 1.0};
  std::string sharing = "on";
  std::size_t iterations = 30;
  std::size_t moves = 0;
  std::size_t restarts = 1;
  std::optional<std::uint64_t> seed;
  std::string layoutFile;
};

void addPlaceOptions(CLI::App* cmd, PlaceOptions& o) {
  cmd->add_option("procs", o.files, "Process files in priority order")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--topology", o.topology, "Hardware topology");
  cmd->add_option("--weights", o.weights, "Cost weights alpha,beta,gamma")
      ->delimiter(',')
      ->expected(3)
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--sharing", o.sharing, "Helper sharing: on or off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--sa-iters", o.iterations, "Annealing outer iterations");
  cmd->add_option("--sa-moves", o.moves,
                  "Proposals per iteration (0: 100 x placed sites)");
  cmd->add_option("--sa-seed", o.seed, "Annealing seed (default: --seed)");
  cmd->add_option("--restarts", o.restarts, "Independent annealing runs")
      ->check(CLI::PositiveNumber);
}

struct Placement {
  std::vector<qmux::ProcessPtr> procs;
  std::vector<qmux::PlacementDemand> demands;
  qmux::AnnealResult result;
};

Placement placeFromOptions(const PlaceOptions& o, const qmux::HardwareGraph& g,
                           std::uint64_t seed, bool anneal) {
  Placement pl;
  pl.procs = loadProcesses(o.files);
  for (const auto& p : pl.procs) {
    pl.demands.push_back(qmux::placementDemand(*p, o.sharing == "off"));
  }
  const qmux::CostWeights w{o.weights.at(0), o.weights.at(1), o.weights.at(2)};
  if (!anneal) {
    return pl;
  }
  qmux::AnnealParams params;
  params.iterations = o.iterations;
  params.movesPerIteration = o.moves;
  params.restarts = o.restarts;
  params.seed = o.seed.value_or(seed);
  pl.result = qmux::placeBatch(g, pl.demands, w, params);
  return pl;
}

json costJson(const qmux::CostBreakdown& c) {
  return {{"intro", c.intro},
          {"inter", c.inter},
          {"hrcost", c.hrcost},
          {"total", c.total}};
}

json batchPlanJson(const std::vector<qmux::PlannedBatch>& plan,
                   const std::vector<qmux::SkippedJob>& skipped,
                   const qmux::RunConfig& config) {
  json batches = json::array();
  std::vector<qmux::Batch> raw;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& b = plan[i].batch;
    raw.push_back(b);
    batches.push_back({{"index", i},
                       {"members", b.memberIds()},
                       {"shots", b.shots},
                       {"makespan", b.makespan()},
                       {"capacity", b.capacity()},
                       {"work", b.work()},
                       {"reason", qmux::reasonName(b.reason)},
                       {"start_time", plan[i].startTime},
                       {"end_time", plan[i].endTime}});
  }
  json dropped = json::array();
  for (const auto& s : skipped) {
    dropped.push_back({{"id", s.id}, {"reason", s.reason}});
  }
  const auto eta = qmux::spaceTimeUtility(raw);
  return {{"schema", qmux::kSchemaVersion},
          {"config", config},
          {"batches", batches},
          {"skipped", dropped},
          {"eta", eta ? json(*eta) : json(nullptr)}};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-programming scheduler for shared quantum hardware",
               "qmux"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  Globals globals;
  app.add_option("--seed", globals.seed, "Random seed")->capture_default_str();
  app.add_option("--out", globals.out, "Output file or directory");
  app.set_config("--config", "",
                 "TOML or INI file; keys under [simulate] or [sweep]")
      ->check(CLI::ExistingFile);
  app.add_option("--format", globals.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}));

  auto* gen = app.add_subcommand(
      "gen", "Generate a workload directory, or one process with --family");
  RunOptions genOpts;
  std::string family;
  std::vector<std::size_t> familyArgs;
  std::uint64_t singleShots = 1000;
  addWorkloadOptions(gen, genOpts);
  gen->add_option("--family", family,
                  "random, mcx, stabilizer or arithmetic");
  gen->add_option("--args", familyArgs, "Family parameters, e.g. 4 or 4,4,15")
      ->delimiter(',');
  gen->add_option("--shots", singleShots, "Shots of the single process")
      ->check(CLI::PositiveNumber);

  auto* schedule = app.add_subcommand(
      "schedule", "Form batches from a workload without placing them");
  RunOptions schedOpts;
  addRunOptions(schedule, schedOpts);
  schedule->add_option("--workload", schedOpts.workloadDir,
                       "Workload directory from 'gen' (default: generate)");
  schedule->add_option("--smax", schedOpts.maxShots, "Alias of --max-shots")
      ->check(CLI::PositiveNumber);

  auto* place = app.add_subcommand("place", "Place one batch of processes");
  PlaceOptions placeOpts;
  addPlaceOptions(place, placeOpts);

  auto* run = app.add_subcommand(
      "run", "Place one batch and devirtualize it into a single stream");
  PlaceOptions runOpts;
  addPlaceOptions(run, runOpts);
  run->add_option("--layout", runOpts.layoutFile,
                  "Layout JSON from 'place' instead of annealing")
      ->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand(
      "simulate", "Run the full pipeline over a workload");
  RunOptions simOpts;
  std::string manifest;
  addRunOptions(simulate, simOpts);
  simulate->add_option("--workload", simOpts.workloadDir,
                       "Workload directory from 'gen' (default: generate)");
  simulate->add_option("--manifest", manifest,
                       "Reproduce the run recorded in this manifest")
      ->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand(
      "sweep", "Ablation sweep over lambda and both policy flags");
  RunOptions sweepOpts;
  std::vector<double> lambdas{0.2, 0.4, 0.6, 0.8};
  addRunOptions(sweep, sweepOpts);
  sweep->add_option("--workload", sweepOpts.workloadDir,
                    "Workload directory from 'gen' (default: generate)");
  sweep->add_option("--lambdas", lambdas, "Comma-separated lambda values")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));

  auto* metrics = app.add_subcommand(
      "metrics", "Recompute the report of a run directory");
  std::string metricsIn;
  std::string metricsCsv;
  metrics->add_option("--in", metricsIn, "Run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  metrics->add_option("--csv", metricsCsv, "Also write per-batch CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      if (!family.empty()) {
        const qmux::FamilyParams params{qmux::familyFromName(family),
                                        familyArgs};
        const auto p = qmux::generateFamily(params, globals.seed,
                                            params.label(), singleShots);
        emit(qmux::serializeProcess(p), globals.out);
        return 0;
      }
      const auto spec = workloadSpec(genOpts, globals.seed);
      const auto jobs = qmux::generateWorkload(spec);
      const auto dir = globals.out.empty() ? std::string("workload")
                                           : globals.out;
      qmux::writeWorkload(dir, jobs, {{"spec", spec}});
      std::cerr << "qmux: " << jobs.size() << " processes written to " << dir
                << '\n';
      return 0;
    }

    if (schedule->parsed()) {
      const auto config = runConfig(schedOpts, globals);
      auto jobs = config.workloadDir.empty()
                      ? qmux::generateWorkload(config.workload)
                      : qmux::readWorkload(config.workloadDir);
      std::vector<qmux::SkippedJob> skipped;
      const auto plan = qmux::planBatches(config, std::move(jobs), &skipped);
      for (const auto& s : skipped) {
        std::cerr << "qmux: skipped: " << s.reason << '\n';
      }
      emit(batchPlanJson(plan, skipped, config).dump(2) + "\n", globals.out);
      return 0;
    }

    if (place->parsed() || run->parsed()) {
      const bool isPlace = place->parsed();
      const auto& o = isPlace ? placeOpts : runOpts;
      const qmux::CostWeights w{o.weights.at(0), o.weights.at(1),
                                o.weights.at(2)};
      try {
        w.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto g = qmux::loadTopology(o.topology);
      const bool fromFile = !isPlace && !o.layoutFile.empty();
      auto pl = placeFromOptions(o, g, globals.seed, !fromFile);
      if (fromFile) {
        std::ifstream in(o.layoutFile);
        const auto j = json::parse(in);
        pl.result.layout = qmux::Layout(
            g.numQubits(),
            j.at("layout").get<std::vector<std::vector<qmux::PhysicalQubit>>>());
        pl.result.cost = qmux::totalCost(pl.result.layout, g, pl.demands, w);
      }
      const auto& layout = pl.result.layout;
      if (isPlace) {
        if (globals.format == "text") {
          std::ostringstream out;
          for (std::size_t p = 0; p < pl.procs.size(); ++p) {
            out << pl.procs[p]->id() << ':';
            for (const auto q : layout.sites(p)) {
              out << ' ' << q;
            }
            out << '\n';
          }
          const auto& c = pl.result.cost;
          out << "cost " << c.total << " (intro " << c.intro << ", inter "
              << c.inter << ", hrcost " << c.hrcost << ")\n";
          emit(out.str(), globals.out);
          return 0;
        }
        json ids = json::array();
        for (const auto& p : pl.procs) {
          ids.push_back(p->id());
        }
        json trace = json::array();
        for (const auto& t : pl.result.trace) {
          trace.push_back({{"iteration", t.iteration},
                           {"temperature", t.temperature},
                           {"current", t.current},
                           {"best", t.best},
                           {"accepted", t.accepted}});
        }
        const json out = {{"schema", qmux::kSchemaVersion},
                          {"topology", o.topology},
                          {"processes", ids},
                          {"layout", layout.allSites()},
                          {"helper_zone", layout.helperZone()},
                          {"cost", costJson(pl.result.cost)},
                          {"initial_cost", costJson(pl.result.initialCost)},
                          {"seed", pl.result.seed},
                          {"initial_temperature",
                           pl.result.initialTemperature},
                          {"trace", trace}};
        emit(out.dump(2) + "\n", globals.out);
        return 0;
      }
      const auto sp = qmux::scheduleInstructions(
          pl.procs, layout, g,
          o.sharing == "on" ? qmux::HelperMode::Shared
                            : qmux::HelperMode::Exclusive);
      for (const auto& id : sp.evicted) {
        std::cerr << "qmux: evicted " << id << '\n';
      }
      const auto iso = qmux::verifyIsolation(sp);
      if (globals.format == "json") {
        json log = json::array();
        for (const auto& ev : sp.bindingLog) {
          log.push_back({{"seq", ev.seq},
                         {"process", sp.processIds.at(ev.owner)},
                         {"helper", ev.helper},
                         {"episode", ev.episode},
                         {"physical", ev.physical},
                         {"kind", ev.kind == qmux::BindingEvent::Kind::Bind
                                      ? "bind"
                                      : "release"}});
        }
        const json out = {{"schema", qmux::kSchemaVersion},
                          {"processes", sp.processIds},
                          {"data_qubits", sp.dataQubits},
                          {"helper_zone", sp.helperZone},
                          {"evicted", sp.evicted},
                          {"cost", costJson(pl.result.cost)},
                          {"stream", sp.toText()},
                          {"binding_log", log},
                          {"isolation_ok", iso.ok}};
        emit(out.dump(2) + "\n", globals.out);
      } else {
        emit(sp.toText(), globals.out);
      }
      if (!iso.ok) {
        std::cerr << "qmux: isolation check failed: " << iso.message << '\n';
        return 1;
      }
      return 0;
    }

    if (simulate->parsed()) {
      const auto r = manifest.empty()
                         ? qmux::simulate(runConfig(simOpts, globals))
                         : qmux::replayManifest(manifest);
      const fs::path dir =
          globals.out.empty()
              ? fs::path("qmux-run-" + std::to_string(r.config.seed))
              : fs::path(globals.out);
      qmux::writeRunDirectory(r, dir);
      printRunSummary(r, dir);
      return 0;
    }

    if (sweep->parsed()) {
      const auto base = runConfig(sweepOpts, globals);
      const auto rows = qmux::ablationSweep(base, lambdas);
      const auto csv = qmux::sweepCsv(rows);
      if (globals.out.empty()) {
        std::cout << csv;
      } else {
        fs::create_directories(globals.out);
        std::ofstream(fs::path(globals.out) / "sweep.csv") << csv;
        std::ofstream(fs::path(globals.out) / "sweep.json")
            << json{{"schema", qmux::kSchemaVersion},
                    {"config", base},
                    {"lambdas", lambdas}}
                   .dump(2)
            << '\n';
      }
      return 0;
    }

    if (metrics->parsed()) {
      const auto report = qmux::reportFromRunDirectory(metricsIn);
      qmux::RunConfig c;
      c.scheduler.lambda = report.at("lambda").get<double>();
      if (globals.format == "csv") {
        emit(qmux::batchCsv(c, qmux::readRunBatches(metricsIn)), globals.out);
      } else {
        emit(report.dump(2) + "\n", globals.out);
      }
      if (!metricsCsv.empty()) {
        emit(qmux::batchCsv(c, qmux::readRunBatches(metricsIn)), metricsCsv);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "qmux: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qmux: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
