#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "hhg/benchmark.hpp"
#include "hhg/config.hpp"

namespace py = pybind11;
using namespace hhg;

namespace {

std::shared_ptr<const PrimitiveGraph> graph_for(const std::string& mesh) {
  const MacroMesh m = mesh == "cube" ? generate_unit_cube() : mesh == "tet" ? generate_single_tet() : load_mesh(mesh);
  return std::make_shared<const PrimitiveGraph>(build_primitive_graph(m));
}

// Operator on one level with an owned primitive graph.
struct PyOperator {
  PyOperator(const std::string& mesh, Discretization kind, int level) : op(graph_for(mesh), level, kind) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (static_cast<std::size_t>(v.size()) != op.num_unknowns())
      throw std::invalid_argument("apply: expected a vector of length " + std::to_string(op.num_unknowns()));
    StokesVector x = StokesVector::zeros(op), y = StokesVector::zeros(op);
    op.from_vector(v, x);
    op.apply(x, y);
    return op.to_vector(y);
  }

  StokesOperator op;
};

py::dict errors(const FieldErrors& e) {
  py::dict d;
  d["u"] = e.u;
  d["p"] = e.p;
  return d;
}

py::dict result_dict(const BenchResult& r) {
  py::dict d;
  d["params"] = r.params.label();
  d["predicted_wu"] = r.predicted_wu;
  d["predicted_wu_level"] = r.predicted_wu_level;
  d["measured_wu"] = r.measured_wu;
  d["flop_ratio"] = r.flop_ratio;
  d["error"] = errors(r.error);
  d["gamma"] = errors(r.gamma);
  d["delta"] = errors(r.delta);
  d["seconds"] = r.seconds;
  d["ok"] = r.ok;
  d["failure"] = r.failure;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Matrix-free Stokes multigrid on hierarchically refined tetrahedral meshes.";
  m.attr("__version__") = library_version();

  py::enum_<Discretization>(m, "Discretization")
      .value("P1P1", Discretization::P1P1)
      .value("P2P1", Discretization::P2P1);
  py::enum_<Relaxation>(m, "Relaxation").value("Forward", Relaxation::Forward).value("Symmetric", Relaxation::Symmetric);
  py::enum_<SchurScaling>(m, "SchurScaling")
      .value("LumpedMass", SchurScaling::LumpedMass)
      .value("PspgDiagonal", SchurScaling::PspgDiagonal);

  py::class_<SolverParams>(m, "SolverParams")
      .def(py::init<>())
      .def_readwrite("nu_pre", &SolverParams::nu_pre)
      .def_readwrite("nu_post", &SolverParams::nu_post)
      .def_readwrite("nu_inc", &SolverParams::nu_inc)
      .def_readwrite("kappa", &SolverParams::kappa)
      .def_readwrite("a_hat", &SolverParams::a_hat)
      .def_readwrite("xi", &SolverParams::xi)
      .def_readwrite("omega_inv", &SolverParams::omega_inv)
      .def_readwrite("schur", &SolverParams::schur)
      .def("validate", &SolverParams::validate)
      .def("in_search_space", &SolverParams::in_search_space)
      .def("label", &SolverParams::label)
      .def("__repr__", [](const SolverParams& s) { return "SolverParams" + s.label(); });

  m.def("parse_params", &parse_params, py::arg("tuple"));
  m.def("parse_discretization", &parse_discretization, py::arg("name"));
  m.def("default_omega_inv", &default_omega_inv, py::arg("kind"));
  m.def("reference_params", &reference_params, py::arg("kind"));
  m.def("search_space", &search_space, py::arg("omega_inv"), py::arg("schur") = SchurScaling::LumpedMass);
  m.def("default_sweep", &default_sweep, py::arg("omega_inv"), py::arg("schur") = SchurScaling::LumpedMass);

  // Exact work values come back as "num/den" strings.
  m.def("operator_work", [](Discretization k, int level) { return to_string(operator_work(k, level)); },
        py::arg("kind"), py::arg("level"));
  m.def("smoother_work_limit",
        [](Discretization k, Relaxation a, int xi) { return to_string(smoother_work_limit(k, a, xi)); },
        py::arg("kind"), py::arg("a_hat"), py::arg("xi"));
  m.def("vcycle_work_bound_limit",
        [](Discretization k, const SolverParams& s) { return to_string(vcycle_work_bound_limit(k, s)); },
        py::arg("kind"), py::arg("params"));
  m.def(
      "fmg_work",
      [](Discretization k, const SolverParams& s, std::optional<int> level) {
        return to_string(level ? fmg_work(k, s, *level) : fmg_work(k, s));
      },
      py::arg("kind"), py::arg("params"), py::arg("level") = py::none());

  m.def("n_tet", &n_tet, py::arg("v"));
  m.def("mesh_hash", [](const std::string& path) { return mesh_hash(load_mesh(path)); }, py::arg("path"));

  py::class_<PyOperator>(m, "StokesOperator")
      .def(py::init<const std::string&, Discretization, int>(), py::arg("mesh"), py::arg("kind"), py::arg("level"))
      .def_property_readonly("level", [](const PyOperator& o) { return o.op.level(); })
      .def_property_readonly("kind", [](const PyOperator& o) { return o.op.kind(); })
      .def_property_readonly("num_velocity_dofs", [](const PyOperator& o) { return o.op.num_velocity_dofs(); })
      .def_property_readonly("num_pressure_dofs", [](const PyOperator& o) { return o.op.num_pressure_dofs(); })
      .def_property_readonly("num_unknowns", [](const PyOperator& o) { return o.op.num_unknowns(); })
      .def_property_readonly("apply_flops", [](const PyOperator& o) { return o.op.apply_flops(); })
      .def_property_readonly("stencil_flops", [](const PyOperator& o) { return o.op.stencil_flops(); })
      .def("apply", &PyOperator::apply, py::arg("x"))
      .def("assembled", [](const PyOperator& o, int cap) { return o.op.export_assembled(cap); },
           py::arg("level_cap") = 3)
      .def(
          "estimate_omega",
          [](const PyOperator& o, int iterations) {
            const OmegaEstimate e = estimate_omega(o.op, iterations);
            return py::make_tuple(e.omega_inv, e.history);
          },
          py::arg("iterations") = 100);

  py::class_<BenchmarkProblem>(m, "BenchmarkProblem")
      .def_static("cube", &BenchmarkProblem::cube, py::arg("kind"), py::arg("max_level"))
      .def_property_readonly("kind", &BenchmarkProblem::kind)
      .def_property_readonly("max_level", &BenchmarkProblem::max_level)
      .def_property_readonly("mesh_hash", &BenchmarkProblem::mesh_hash)
      .def(
          "reference",
          [](BenchmarkProblem& p, double eps, const std::string& cache) {
            const ReferenceSolution& r = p.reference(eps, cache);
            py::dict d;
            d["error"] = errors(r.error);
            d["cycles"] = r.cycles;
            d["from_cache"] = r.from_cache;
            return d;
          },
          py::arg("eps") = 1e-12, py::arg("cache_dir") = "")
      .def(
          "run_fmg",
          [](BenchmarkProblem& p, const SolverParams& s, double eps, const std::string& cache) {
            const ReferenceSolution& ref = p.reference(eps, cache);
            return result_dict(run_fmg(p, s, ref));
          },
          py::arg("params"), py::arg("eps") = 1e-12, py::arg("cache_dir") = "")
      .def(
          "estimate_omega",
          [](const BenchmarkProblem& p, int iterations) {
            return estimate_omega(p.hierarchy(), p.max_level(), iterations).omega_inv;
          },
          py::arg("iterations") = 100);
}
