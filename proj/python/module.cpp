#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "eshare/bidding.hpp"
#include "eshare/brlab.hpp"
#include "eshare/cli.hpp"
#include "eshare/equilibrium.hpp"
#include "eshare/generator.hpp"
#include "eshare/scenario_io.hpp"

namespace py = pybind11;
using namespace eshare;

namespace {

Scenario scenario_from_json_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidScenario, e.what());
  }
  return parse_scenario(doc);
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_command(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-sharing market equilibrium engine";

  static PyObject* error_type = PyErr_NewException("eshare._core.EshareError", PyExc_RuntimeError, nullptr);
  m.attr("EshareError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::handle(error_type)(e.what());
      instance.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, instance.ptr());
    }
  });

  py::class_<LineSpec>(m, "LineSpec")
      .def(py::init<int, int, double, double>(), py::arg("from_bus"), py::arg("to_bus"), py::arg("weight") = 1.0,
           py::arg("limit") = kUnlimited)
      .def_readwrite("from_bus", &LineSpec::from)
      .def_readwrite("to_bus", &LineSpec::to)
      .def_readwrite("weight", &LineSpec::weight)
      .def_readwrite("limit", &LineSpec::limit);

  py::class_<NetworkModel>(m, "NetworkModel")
      .def_property_readonly("bus_count", &NetworkModel::bus_count)
      .def_property_readonly("line_count", &NetworkModel::line_count)
      .def_property_readonly("slack", &NetworkModel::slack)
      .def_property_readonly("lines", &NetworkModel::lines)
      .def_property_readonly("ptdf", &NetworkModel::ptdf)
      .def_property_readonly("limits", &NetworkModel::limits);

  m.def("build_network", &build_network, py::arg("bus_count"), py::arg("lines"), py::arg("slack") = py::none());
  m.def("line_flows", &line_flows, py::arg("network"), py::arg("withdrawals"));
  m.def("dc_flow_oracle", &dc_flow_oracle, py::arg("network"), py::arg("injections"));
  m.def("is_radial", &is_radial, py::arg("network"));

  py::class_<Prosumer>(m, "Prosumer")
      .def(py::init([](double c, double d, double D) { return Prosumer{c, d, D, {}}; }), py::arg("c"), py::arg("d"),
           py::arg("D"))
      .def_readwrite("c", &Prosumer::c)
      .def_readwrite("d", &Prosumer::d)
      .def_readwrite("D", &Prosumer::D);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("network", &Scenario::network)
      .def_readonly("prosumers", &Scenario::prosumers)
      .def_readonly("a", &Scenario::a)
      .def_readonly("label", &Scenario::label)
      .def_property_readonly("size", &Scenario::size)
      .def_property_readonly("c", &Scenario::c)
      .def_property_readonly("d", &Scenario::d)
      .def_property_readonly("D", &Scenario::D)
      .def("to_json", [](const Scenario& s) { return scenario_to_json(s).dump(2); });

  m.def(
      "make_scenario",
      [](const NetworkModel& net, std::vector<Prosumer> prosumers, double a) {
        return make_scenario(net, std::move(prosumers), a);
      },
      py::arg("network"), py::arg("prosumers"), py::arg("a"));
  m.def("load_scenario", [](const std::filesystem::path& path) { return load_scenario(path).scenario; },
        py::arg("path"));
  m.def("parse_scenario", &scenario_from_json_text, py::arg("text"));
  m.def(
      "generate_scenario",
      [](std::uint64_t seed, int size, const std::string& style, std::optional<double> a) {
        GeneratorOptions opts;
        opts.style = parse_tree_style(style);
        opts.a = a;
        return generate_scenario(seed, size, opts);
      },
      py::arg("seed"), py::arg("size"), py::arg("style") = "radial", py::arg("a") = py::none());

  py::class_<ClearingOutcome>(m, "ClearingOutcome")
      .def_readonly("lam", &ClearingOutcome::lambda)
      .def_readonly("q", &ClearingOutcome::q)
      .def_readonly("eta", &ClearingOutcome::eta)
      .def_readonly("alpha_lower", &ClearingOutcome::alpha_lower)
      .def_readonly("alpha_upper", &ClearingOutcome::alpha_upper)
      .def_readonly("flows", &ClearingOutcome::flows);
  m.def("clear_market", &clear_market, py::arg("scenario"), py::arg("b"));
  m.def("clearing_kkt_residual", &clearing_kkt_residual, py::arg("scenario"), py::arg("b"), py::arg("outcome"));

  py::class_<EquilibriumResult>(m, "EquilibriumResult")
      .def_readonly("p", &EquilibriumResult::p_bar)
      .def_readonly("b", &EquilibriumResult::b_bar)
      .def_readonly("lambda_r", &EquilibriumResult::lambda_r)
      .def_readonly("q", &EquilibriumResult::q_bar)
      .def_readonly("kappa", &EquilibriumResult::kappa)
      .def_readonly("tau_lower", &EquilibriumResult::tau_lower)
      .def_readonly("tau_upper", &EquilibriumResult::tau_upper)
      .def_readonly("costs", &EquilibriumResult::costs)
      .def_readonly("net_payment", &EquilibriumResult::net_payment);
  m.def("improved_gne", &improved_gne, py::arg("scenario"));

  py::class_<SocialOptimum>(m, "SocialOptimum")
      .def_readonly("p", &SocialOptimum::p_tilde)
      .def_readonly("costs", &SocialOptimum::costs)
      .def_readonly("total_cost", &SocialOptimum::total_cost);
  m.def("social_optimum", &social_optimum, py::arg("scenario"));

  py::class_<VariationalEquilibrium>(m, "VariationalEquilibrium")
      .def_readonly("p", &VariationalEquilibrium::p_bar)
      .def_readonly("b", &VariationalEquilibrium::b_bar)
      .def_readonly("lam", &VariationalEquilibrium::lambda_bar)
      .def_readonly("warnings", &VariationalEquilibrium::warnings);
  m.def("variational_equilibrium", &variational_equilibrium, py::arg("scenario"));

  py::class_<PoaReport>(m, "PoaReport")
      .def_readonly("poa", &PoaReport::poa)
      .def_readonly("upper_bound", &PoaReport::upper_bound);
  m.def("poa", &poa, py::arg("scenario"));

  py::class_<BiddingResult>(m, "BiddingResult")
      .def_property_readonly("converged", [](const BiddingResult& r) { return r.status == BiddingStatus::Converged; })
      .def_readonly("iterations", &BiddingResult::iterations)
      .def_readonly("lam", &BiddingResult::lambda)
      .def_readonly("b", &BiddingResult::b)
      .def_readonly("p", &BiddingResult::p);
  m.def(
      "run_bidding",
      [](const Scenario& s, std::optional<double> eps, int max_iter) {
        BiddingConfig cfg;
        cfg.epsilon = eps;
        cfg.max_iter = max_iter;
        return run_bidding(s, cfg);
      },
      py::arg("scenario"), py::arg("eps") = py::none(), py::arg("max_iter") = 1000);

  py::class_<GneVerification>(m, "GneVerification")
      .def_readonly("is_gne", &GneVerification::is_gne)
      .def_readonly("gaps", &GneVerification::gaps)
      .def_readonly("best_bid", &GneVerification::best_bid);
  m.def(
      "verify_gne", [](const Scenario& s, const Eigen::VectorXd& b, double tol) { return verify_gne(s, b, tol); },
      py::arg("scenario"), py::arg("b"), py::arg("tol") = 1e-6);

  m.def("run_command", &run_cli, py::arg("args"),
        "Runs one CLI command in process and returns (exit_code, stdout, stderr).");
}
