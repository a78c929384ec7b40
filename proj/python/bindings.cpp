#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hubbard_vqe/experiment.hpp"

namespace py = pybind11;
using namespace hvqe;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Symmetry-resolved VQE for the Hubbard ring (C++ core)";
  m.attr("__version__") = library_version();

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::enum_<Irrep>(m, "Irrep")
      .value("A1", Irrep::A1)
      .value("A2", Irrep::A2)
      .value("B1", Irrep::B1)
      .value("B2", Irrep::B2)
      .value("E", Irrep::E);
  m.def("parse_irrep", &parse_irrep);

  py::class_<HubbardParams>(m, "HubbardParams")
      .def(py::init([](std::size_t n_sites, double t, double t_prime, double u) {
             HubbardParams p{n_sites, t, t_prime, u};
             p.validate();
             return p;
           }),
           py::arg("n_sites") = 4, py::arg("t") = 1.0, py::arg("t_prime") = 0.0,
           py::arg("u") = 0.5)
      .def_readwrite("n_sites", &HubbardParams::n_sites)
      .def_readwrite("t", &HubbardParams::t)
      .def_readwrite("t_prime", &HubbardParams::t_prime)
      .def_readwrite("u", &HubbardParams::u);

  py::class_<SectorLabel>(m, "SectorLabel")
      .def_static("for_irrep", &SectorLabel::for_irrep)
      .def_readonly("irrep", &SectorLabel::irrep)
      .def_readonly("s_c2", &SectorLabel::s_c2)
      .def_readonly("s_m", &SectorLabel::s_m)
      .def_readonly("s_p_up", &SectorLabel::s_p_up)
      .def_readonly("s_p_down", &SectorLabel::s_p_down)
      .def("__repr__", &SectorLabel::to_string);

  py::class_<PauliSum>(m, "PauliSum")
      .def_property_readonly("n_qubits", &PauliSum::n_qubits)
      .def("__len__", &PauliSum::size)
      .def("to_text", &PauliSum::to_text)
      .def_static("from_text", [](const std::string& s) { return PauliSum::from_text(s); })
      .def("to_dense", &PauliSum::to_dense)
      .def("terms", [](const PauliSum& s) {
        std::vector<std::pair<std::string, complex_t>> out;
        for (const auto& t : s.terms()) out.emplace_back(t.string.to_string(), t.coeff);
        return out;
      });

  py::class_<ModelOracle>(m, "ModelOracle")
      .def(py::init<const HubbardParams&>())
      .def_property_readonly("hamiltonian",
                             [](const ModelOracle& o) { return o.model().hamiltonian; })
      .def("sector_ground_energy",
           [](const ModelOracle& o, Irrep ir) {
             return o.sector_ground_energy(SectorLabel::for_irrep(ir, o.params().n_sites));
           })
      .def("irrep_ground_energy", &ModelOracle::irrep_ground_energy)
      .def("ground_state", [](const ModelOracle& o) {
        const auto g = o.ground_state();
        return py::make_tuple(g.energy, g.label.irrep);
      });

  m.def("find_transition", &find_transition, py::arg("base"), py::arg("first"), py::arg("second"),
        py::arg("lo"), py::arg("hi"), py::arg("tol") = 1e-4);

  py::class_<SectorProblem>(m, "SectorProblem")
      .def_static("build", &SectorProblem::build)
      .def_readonly("hamiltonian", &SectorProblem::hamiltonian)
      .def_readonly("number", &SectorProblem::number)
      .def_readonly("e0_sector", &SectorProblem::e0_sector)
      .def_readonly("e0_ground", &SectorProblem::e0_ground)
      .def_readonly("ground_irrep", &SectorProblem::ground_irrep)
      .def_property_readonly("plan_json", [](const SectorProblem& p) { return p.plan.to_json(); });

  m.def("lanczos_energy", &lanczos_energy, py::arg("m1"), py::arg("m2"), py::arg("m3"));
  m.def(
      "weighted_average",
      [](const std::vector<std::pair<double, double>>& xs) {
        std::vector<EnergyEstimate> e;
        for (const auto& [v, s] : xs) e.push_back({v, s});
        const auto w = weighted_average(e);
        return py::make_tuple(w.estimate.value, w.estimate.sigma);
      },
      "Inverse-variance weighted mean of (value, sigma) pairs.");

  m.def("config_from_json", [](const std::string& text) {
    return ExperimentConfig::from_json(text).to_json();
  }, "Validates a config and returns it with defaults filled in.");
  m.def(
      "run_cell",
      [](const std::string& config_json, std::size_t grid_index, Irrep sector) {
        const auto cfg = ExperimentConfig::from_json(config_json);
        std::vector<std::string> out;
        {
          py::gil_scoped_release release;
          for (const auto& r : run_cell(cfg, grid_index, sector)) out.push_back(r.to_json());
        }
        return out;
      },
      py::arg("config_json"), py::arg("grid_index"), py::arg("sector"),
      "Runs one grid point and sector; returns one JSON record per sequence.");
  m.def("emit_plotdata", &emit_plotdata, py::arg("results_dir"), py::arg("out_dir") = "");
}
