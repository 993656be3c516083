#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cutlab/concentration.hpp"
#include "cutlab/cutdist.hpp"
#include "cutlab/cutnorm.hpp"
#include "cutlab/errors.hpp"
#include "cutlab/experiments.hpp"
#include "cutlab/io.hpp"
#include "cutlab/kernel.hpp"
#include "cutlab/truncate.hpp"
#include "cutlab/vkernel.hpp"

namespace py = pybind11;
using namespace cutlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

StepKernel to_step(const Array& a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1)) throw py::value_error("expected a square matrix");
  const auto n = static_cast<std::size_t>(a.shape(0));
  return StepKernel(n, std::vector<double>(a.data(), a.data() + n * n));
}

Array from_step(const StepKernel& W) {
  Array out({W.n(), W.n()});
  std::copy(W.values().begin(), W.values().end(), out.mutable_data());
  return out;
}

py::dict cut_result(const CutNormResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["S"] = r.S;
  d["T"] = r.T;
  d["method"] = std::string(to_string(r.method));
  return d;
}

ConcentrationParams make_params(double p, double nu, double gamma, double phi, double lambda, int q) {
  ConcentrationParams c;
  c.p = p;
  c.nu = nu;
  c.gamma = gamma;
  c.phi = phi;
  c.lambda = lambda;
  c.q = q;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cut norms, k-samples and sampling-lemma bounds for unbounded kernels";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<IntegrabilityError>(m, "IntegrabilityError", PyExc_ValueError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);

  py::class_<KernelSpec>(m, "Kernel")
      .def_static("pow_corner", &KernelSpec::pow_corner, py::arg("alpha"), py::arg("c") = 1.0)
      .def_static("signed_pow", &KernelSpec::signed_pow, py::arg("alpha"), py::arg("c") = 1.0)
      .def_static("checkerboard", &KernelSpec::checkerboard, py::arg("m"), py::arg("c") = 1.0)
      .def_static("constant", &KernelSpec::constant, py::arg("c"))
      .def_static("step", [](const Array& a) {
        const StepKernel W = to_step(a);
        return KernelSpec::step(static_cast<int>(W.n()), {W.values().begin(), W.values().end()});
      })
      .def_static("truncated", &KernelSpec::truncated, py::arg("source"), py::arg("threshold"))
      .def_static("from_json", [](const std::string& s) { return kernel_from_json(Json::parse(s)); })
      .def("to_json", [](const KernelSpec& U) { return to_json(U).dump(); })
      .def_property_readonly("family", [](const KernelSpec& U) { return std::string(to_string(U.family())); })
      .def_property_readonly("nonnegative", &KernelSpec::nonnegative)
      .def_property_readonly("singular", &KernelSpec::singular)
      .def("__call__", [](const KernelSpec& U, double x, double y) { return eval(U, x, y); })
      .def("lp_norm", [](const KernelSpec& U, double p) { return lp_norm(U, p).value; })
      .def("cut_norm", [](const KernelSpec& U) { return cut_norm_reference(U).value; })
      .def("__repr__", [](const KernelSpec& U) { return "Kernel(" + to_json(U).dump() + ")"; });

  m.def("draw_sample", [](const KernelSpec& U, std::size_t k, std::uint64_t seed) {
    const Sample s = draw_sample(U, k, seed);
    return py::make_tuple(s.points.coords, from_step(s.kernel));
  }, py::arg("kernel"), py::arg("k"), py::arg("seed"));

  m.def("cut_norm_exact", [](const Array& a) { return cut_result(cut_norm_exact(to_step(a))); });
  m.def("cut_norm_oracle", [](const Array& a) { return cut_result(matrix_cut_norm_oracle(to_step(a))); });
  m.def("cut_norm_heuristic", [](const Array& a, int restarts, std::uint64_t seed) {
    return cut_result(cut_norm_heuristic(to_step(a), restarts, seed));
  }, py::arg("matrix"), py::arg("restarts") = 16, py::arg("seed") = 0);
  m.def("cut_norm", [](const Array& a) { return cut_result(cut_norm_auto(to_step(a))); });

  m.def("cut_distance_upper", [](const Array& u, const Array& w, std::uint64_t seed) {
    const CutDistanceEstimate e = cut_distance_upper(to_step(u), to_step(w), AnnealConfig{}, seed);
    return to_json(e).dump();
  }, py::arg("u"), py::arg("w"), py::arg("seed") = 0);

  m.def("vector_cut_norm_exact", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 3 || a.shape(0) != a.shape(1)) throw py::value_error("expected an n x n x d array");
    const auto n = static_cast<std::size_t>(a.shape(0)), d = static_cast<std::size_t>(a.shape(2));
    const VectorStepKernel W(n, d, std::vector<double>(a.data(), a.data() + n * n * d));
    return vector_cut_norm_exact(W).value;
  });

  m.def("theorem_bound", [](const std::string& name, const KernelSpec& U, std::size_t k, double p,
                            double nu, double gamma, double phi, double lambda, int q) {
    const BoundValue b = theorem_bound(bound_from_string(name), U, make_params(p, nu, gamma, phi, lambda, q), k);
    py::dict d;
    d["value"] = b.value;
    d["probability"] = b.probability;
    d["probability_alt"] = b.probability_alt;
    py::dict terms;
    for (const auto& [t, v] : b.terms) terms[py::str(t)] = v;
    d["terms"] = terms;
    return d;
  }, py::arg("name"), py::arg("kernel"), py::arg("k"), py::arg("p") = 3.0, py::arg("nu") = 2.0,
     py::arg("gamma") = 0.45, py::arg("phi") = 0.2, py::arg("lambda_") = 1.0, py::arg("q") = 2);

  m.def("truncation_tail_mass", &truncation_tail_mass);
  m.def("truncation_l1_error_bound", &truncation_l1_error_bound);

  m.def("run_experiment", [](const std::string& config, bool write) {
    const ExperimentConfig cfg = config_from_json(Json::parse(config));
    RunResult r;
    {
      py::gil_scoped_release release;
      r = run_experiment(cfg);
    }
    if (write) write_outputs(cfg, r);
    return r.report.dump();
  }, py::arg("config"), py::arg("write") = false);

  m.def("verify_report", [](const std::string& dir) {
    const VerifyResult v = verify_report(dir);
    return py::make_tuple(v.ok, v.differences);
  });
}
