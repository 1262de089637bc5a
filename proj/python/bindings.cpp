#include "qmux/Simulation.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace qmux;

namespace {

// JSON crosses the boundary as text; the Python side wraps it in json.
RunConfig configFrom(const std::string& text) {
  return nlohmann::json::parse(text).get<RunConfig>();
}

std::vector<ProcessPtr> shared(const std::vector<Process>& procs) {
  std::vector<ProcessPtr> out;
  for (const auto& p : procs) {
    out.push_back(std::make_shared<const Process>(p));
  }
  return out;
}

py::dict costDict(const CostBreakdown& c) {
  py::dict d;
  d["intro"] = c.intro;
  d["inter"] = c.inter;
  d["hrcost"] = c.hrcost;
  d["total"] = c.total;
  return d;
}

AnnealResult placeAll(const HardwareGraph& g, const std::vector<Process>& procs,
                      const CostWeights& w, bool sharing,
                      const AnnealParams& params) {
  std::vector<PlacementDemand> demands;
  for (const auto& p : procs) {
    demands.push_back(placementDemand(p, !sharing));
  }
  return placeBatch(g, demands, w, params);
}

py::dict layoutDict(const AnnealResult& r) {
  py::dict d;
  d["sites"] = r.layout.allSites();
  d["helper_zone"] = r.layout.helperZone();
  d["cost"] = costDict(r.cost);
  d["initial_cost"] = costDict(r.initialCost);
  d["seed"] = r.seed;
  return d;
}

} // namespace

PYBIND11_MODULE(_qmux, m) {
  m.doc() = "Batch scheduling, placement and helper-qubit routing for "
            "multi-programmed quantum hardware";

  py::register_exception<TopologyError>(m, "TopologyError", PyExc_ValueError);
  py::register_exception<ProcessError>(m, "ProcessError", PyExc_ValueError);
  py::register_exception<LayoutError>(m, "LayoutError", PyExc_ValueError);
  py::register_exception<DistributionError>(m, "DistributionError",
                                            PyExc_ValueError);

  py::class_<HardwareGraph>(m, "HardwareGraph")
      .def(py::init<std::size_t, std::vector<Edge>, std::string>(),
           py::arg("num_qubits"), py::arg("edges"), py::arg("name") = "")
      .def_property_readonly("num_qubits", &HardwareGraph::numQubits)
      .def_property_readonly("edges", &HardwareGraph::edges)
      .def_property_readonly("name", &HardwareGraph::name)
      .def("distance", &HardwareGraph::distance)
      .def("diameter", &HardwareGraph::diameter)
      .def("__repr__", [](const HardwareGraph& g) {
        return "<HardwareGraph " + g.name() + " qubits=" +
               std::to_string(g.numQubits()) + ">";
      });
  m.def("load_topology", &loadTopology, py::arg("descriptor"));

  py::class_<Process>(m, "Process")
      .def_property_readonly("id", &Process::id)
      .def_property_readonly("num_data", &Process::numData)
      .def_property_readonly("num_helper", &Process::numHelper)
      .def_property_readonly("shots", &Process::shots)
      .def_property_readonly("depth", &Process::depth)
      .def_property_readonly("arrival_time", &Process::arrivalTime)
      .def_property_readonly("peak_helper_demand", &Process::peakHelperDemand)
      .def_property_readonly("gate_count", &Process::gateCount)
      .def("stats",
           [](const Process& p) {
             const auto s = p.stats();
             py::dict d;
             d["total_depth_demand"] = s.totalDepthDemand;
             d["work_volume"] = s.workVolume;
             return d;
           })
      .def("with_shots", &Process::withShots)
      .def("serialize", &serializeProcess)
      .def(py::self == py::self)
      .def("__repr__", [](const Process& p) {
        return "<Process " + p.id() + " data=" + std::to_string(p.numData()) +
               " helper=" + std::to_string(p.numHelper()) +
               " depth=" + std::to_string(p.depth()) + ">";
      });
  m.def("parse_process", &parseProcess, py::arg("text"));
  m.def("load_process", &loadProcess, py::arg("path"));
  m.def(
      "generate_family",
      [](const std::string& family, std::vector<std::size_t> args,
         std::uint64_t seed, std::string id, std::uint64_t shots) {
        return generateFamily({familyFromName(family), std::move(args)}, seed,
                              std::move(id), shots);
      },
      py::arg("family"), py::arg("args"), py::arg("seed") = 0,
      py::arg("id") = "", py::arg("shots") = 1);

  m.def(
      "form_batch",
      [](const std::vector<Process>& procs, std::size_t totalQubits,
         double lambda, std::uint64_t maxShots, bool shotAware, double now) {
        SchedulerConfig cfg;
        cfg.lambda = lambda;
        cfg.maxShots = maxShots;
        cfg.totalQubits = totalQubits;
        cfg.validate();
        std::vector<QueueEntry> queue;
        for (const auto& p : shared(procs)) {
          queue.push_back(admit(p, totalQubits));
        }
        const auto ordered =
            shotAware ? prioritize(std::move(queue)) : arrivalOrder(std::move(queue));
        const auto batch = formBatch(ordered, cfg, now);
        if (!batch) {
          return py::object(py::none());
        }
        py::dict d;
        d["members"] = batch->memberIds();
        d["shots"] = batch->shots;
        d["reason"] = std::string(reasonName(batch->reason));
        d["makespan"] = batch->makespan();
        d["capacity"] = batch->capacity();
        d["work"] = batch->work();
        d["eta"] = static_cast<double>(batch->work()) /
                   static_cast<double>(batch->capacity());
        return py::object(d);
      },
      py::arg("processes"), py::arg("total_qubits"), py::arg("lambda_") = 0.6,
      py::arg("max_shots") = 8192, py::arg("shot_aware") = true,
      py::arg("now") = 0.0);

  m.def(
      "place",
      [](const std::vector<Process>& procs, const std::string& topology,
         std::tuple<double, double, double> weights, bool sharing,
         std::size_t iterations, std::uint64_t seed) {
        const auto g = loadTopology(topology);
        CostWeights w{std::get<0>(weights), std::get<1>(weights),
                      std::get<2>(weights)};
        w.validate();
        AnnealParams params;
        params.iterations = iterations;
        params.seed = seed;
        return layoutDict(placeAll(g, procs, w, sharing, params));
      },
      py::arg("processes"), py::arg("topology"),
      py::arg("weights") = std::make_tuple(0.5, 0.3, 1.0),
      py::arg("sharing") = true, py::arg("iterations") = 30,
      py::arg("seed") = 0);

  m.def(
      "run",
      [](const std::vector<Process>& procs, const std::string& topology,
         bool sharing, std::size_t iterations, std::uint64_t seed) {
        const auto g = loadTopology(topology);
        AnnealParams params;
        params.iterations = iterations;
        params.seed = seed;
        const auto placed = placeAll(g, procs, CostWeights{}, sharing, params);
        const auto program = scheduleInstructions(
            shared(procs), placed.layout, g,
            sharing ? HelperMode::Shared : HelperMode::Exclusive);
        const auto iso = verifyIsolation(program);
        py::dict d = layoutDict(placed);
        d["stream"] = program.toText();
        d["completed"] = program.completed;
        d["evicted"] = program.evicted;
        d["isolation_ok"] = iso.ok;
        d["isolation_message"] = iso.message;
        d["share_ratio"] = shareRatio(program).value;
        d["utilization"] = batchUtilization(program, g.numQubits());
        return d;
      },
      py::arg("processes"), py::arg("topology"), py::arg("sharing") = true,
      py::arg("iterations") = 30, py::arg("seed") = 0);

  m.def("fidelity_l1", &fidelityL1, py::arg("ideal"), py::arg("real"));
  m.def(
      "hr_ratio",
      [](double intro, double hrcost) {
        return hrRatio({intro, 0.0, hrcost, 0.0});
      },
      py::arg("intro"), py::arg("hrcost"));

  m.def(
      "_simulate",
      [](const std::string& config, const std::string& outDir) {
        const auto result = simulate(configFrom(config));
        if (!outDir.empty()) {
          writeRunDirectory(result, outDir);
        }
        return result.report.dump();
      },
      py::arg("config"), py::arg("out_dir") = "",
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "_report_from_run_directory",
      [](const std::string& dir) { return reportFromRunDirectory(dir).dump(); },
      py::arg("dir"));
  m.def(
      "_sweep",
      [](const std::string& config, const std::vector<double>& lambdas) {
        return sweepCsv(ablationSweep(configFrom(config), lambdas));
      },
      py::arg("config"), py::arg("lambdas"),
      py::call_guard<py::gil_scoped_release>());
  m.def("_default_config", [] { return nlohmann::json(RunConfig{}).dump(); });
}
