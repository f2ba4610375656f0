#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mtmlca/errors.hpp"
#include "mtmlca/harness.hpp"
#include "mtmlca/metrics.hpp"
#include "mtmlca/mlca.hpp"
#include "mtmlca/serialization.hpp"

namespace py = pybind11;
using namespace mtmlca;

namespace {

py::dict outcome_to_dict(const AuctionOutcome& out) {
  std::vector<std::string> allocation;
  for (const auto& c : out.allocation.columns) allocation.push_back(c.to_string());
  std::vector<std::vector<std::pair<std::string, double>>> reports;
  for (int i = 0; i < out.reports.num_bidders(); ++i) {
    std::vector<std::pair<std::string, double>> list;
    for (const auto& r : out.reports.of(i)) list.emplace_back(r.bundle.to_string(), r.value);
    reports.push_back(std::move(list));
  }
  py::list rounds;
  for (const auto& t : out.trace) {
    py::dict d;
    d["round"] = t.round;
    d["tentative_welfare"] = t.tentative_welfare;
    d["solver_nodes"] = t.solver_nodes;
    d["skipped"] = t.skipped;
    d["mape"] = t.mape ? py::cast(*t.mape) : py::none();
    rounds.append(d);
  }
  py::dict d;
  d["allocation"] = allocation;
  d["payments"] = out.payments;
  d["reports"] = reports;
  d["reported_welfare"] = out.reported_welfare;
  d["trace"] = rounds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multi-task monotone-network combinatorial auctions";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<ExhaustionError>(m, "ExhaustionError", PyExc_RuntimeError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_ArithmeticError);

  py::class_<Bundle>(m, "Bundle")
      .def(py::init<std::size_t>(), py::arg("num_items"))
      .def_static("from_string", &Bundle::from_string)
      .def_static("from_items", &Bundle::from_items, py::arg("num_items"), py::arg("items"))
      .def_static("full", &Bundle::full)
      .def("items", &Bundle::items)
      .def("count", &Bundle::count)
      .def("__len__", &Bundle::size)
      .def("__contains__", &Bundle::test)
      .def("__or__", &Bundle::operator|)
      .def("__and__", &Bundle::operator&)
      .def("__eq__", [](const Bundle& a, const Bundle& b) { return a == b; })
      .def("__hash__", &Bundle::hash)
      .def("__str__", &Bundle::to_string)
      .def("__repr__", [](const Bundle& b) { return "Bundle('" + b.to_string() + "')"; });

  py::class_<InstanceConfig>(m, "InstanceConfig")
      .def(py::init<>())
      .def_readwrite("regions", &InstanceConfig::regions)
      .def_readwrite("blocks_per_region", &InstanceConfig::blocks_per_region)
      .def_readwrite("n_local", &InstanceConfig::n_local)
      .def_readwrite("n_regional", &InstanceConfig::n_regional)
      .def_readwrite("n_national", &InstanceConfig::n_national)
      .def_readwrite("rho_corr", &InstanceConfig::rho_corr)
      .def_readwrite("beta", &InstanceConfig::beta)
      .def_readwrite("delta", &InstanceConfig::delta);

  py::class_<AuctionInstance>(m, "AuctionInstance")
      .def_property_readonly("num_items", &AuctionInstance::num_items)
      .def_property_readonly("num_bidders", &AuctionInstance::num_bidders)
      .def_property_readonly("kinds", [](const AuctionInstance& inst) {
        std::vector<std::string> out;
        for (const auto& b : inst.bidders) out.push_back(to_string(b.kind));
        return out;
      });

  m.def("generate_instance", &generate_instance, py::arg("config"), py::arg("seed"));
  m.def("true_value", &true_value, py::arg("instance"), py::arg("bidder"), py::arg("bundle"));
  m.def("optimal_true_welfare", [](const AuctionInstance& inst) {
    const auto res = optimal_true_welfare(inst);
    std::vector<std::string> cols;
    for (const auto& c : res.allocation.columns) cols.push_back(c.to_string());
    return py::make_tuple(cols, res.welfare);
  });

  py::class_<MvnnParams>(m, "Mvnn")
      .def_readwrite("weights", &MvnnParams::weights)
      .def_readwrite("biases", &MvnnParams::biases)
      .def_readwrite("cutoff", &MvnnParams::cutoff)
      .def_readwrite("scale", &MvnnParams::scale)
      .def("__call__", &forward, py::arg("bundle"))
      .def("satisfies_constraints", &satisfies_constraints)
      .def("to_json", [](const MvnnParams& p) { return mvnn_to_json(p).dump(); })
      .def_static("from_json", [](const std::string& s) { return mvnn_from_json(nlohmann::json::parse(s)); });

  m.def(
      "new_mvnn",
      [](int input_dim, std::vector<int> hidden_widths, double cutoff, std::uint64_t seed) {
        Architecture arch;
        arch.hidden_widths = std::move(hidden_widths);
        arch.cutoff = cutoff;
        Rng rng(seed);
        return new_mvnn(arch, input_dim, rng);
      },
      py::arg("input_dim"), py::arg("hidden_widths") = std::vector<int>{16, 16}, py::arg("cutoff") = 1.0,
      py::arg("seed") = 0);
  m.def("bounded_relu", &bounded_relu, py::arg("z"), py::arg("t"));

  m.def(
      "solve_reported_wdp",
      [](int num_items, const std::vector<std::vector<std::pair<std::string, double>>>& reports) {
        ReportSet set(static_cast<int>(reports.size()), static_cast<std::size_t>(num_items));
        for (std::size_t i = 0; i < reports.size(); ++i) {
          for (const auto& [bits, value] : reports[i]) set.add(static_cast<int>(i), Bundle::from_string(bits), value);
        }
        const auto vcg = vcg_outcome(set);
        std::vector<std::string> cols;
        for (const auto& c : vcg.main.allocation.columns) cols.push_back(c.to_string());
        return py::make_tuple(cols, vcg.main.welfare, vcg.payments);
      },
      py::arg("num_items"), py::arg("reports"),
      "Reported-welfare optimum and VCG payments. Reports are (bit string, value) lists per bidder.");

  m.def(
      "wilcoxon_one_tailed",
      [](const std::vector<std::pair<double, double>>& pairs) {
        const auto r = wilcoxon_one_tailed(pairs);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("pairs"));

  m.def(
      "run_mlca",
      [](const AuctionInstance& inst, const std::string& method, int q_init, int q_round, int q_max,
         std::uint64_t seed, int epochs) {
        MlcaConfig mlca;
        mlca.q_init = q_init;
        mlca.q_round = q_round;
        mlca.q_max = q_max;
        mlca.seed = seed;
        TrainConfig train;
        train.epochs = epochs;
        py::gil_scoped_release release;
        auto out = run_mlca(inst, method_from_string(method), mlca, train);
        py::gil_scoped_acquire acquire;
        py::dict d = outcome_to_dict(out);
        d["efficiency"] = efficiency(social_welfare(inst, out.allocation), optimal_true_welfare(inst).welfare);
        return d;
      },
      py::arg("instance"), py::arg("method") = "baseline", py::arg("q_init") = 1, py::arg("q_round") = 1,
      py::arg("q_max") = 10, py::arg("seed") = 0, py::arg("epochs") = 512);

  m.def(
      "run_experiment",
      [](const std::filesystem::path& config, const std::filesystem::path& out, int jobs) {
        const auto parsed = parse_config(config);
        ExperimentOptions options;
        options.jobs = jobs;
        py::gil_scoped_release release;
        return run_experiment(parsed, out, options).results.size();
      },
      py::arg("config"), py::arg("out"), py::arg("jobs") = 1);
  m.def(
      "summarize",
      [](const std::filesystem::path& dir) { return summary_csv(summarize(dir)); }, py::arg("results_dir"));
}
