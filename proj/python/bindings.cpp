#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "legendre/boltzmann.hpp"
#include "legendre/error.hpp"
#include "legendre/eval.hpp"
#include "legendre/optimizer.hpp"

namespace py = pybind11;
using namespace legendre;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

RawTensor to_tensor(const Array& a) {
  if (a.ndim() < 1) throw DomainError("expected an array with at least one dimension");
  std::vector<int> dims;
  for (py::ssize_t k = 0; k < a.ndim(); ++k) dims.push_back(static_cast<int>(a.shape(k)));
  return RawTensor(Shape(dims), std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const RawTensor& x) {
  std::vector<py::ssize_t> shape(x.shape().dims().begin(), x.shape().dims().end());
  Array out(shape);
  std::copy(x.values().begin(), x.values().end(), out.mutable_data());
  return out;
}

py::array_t<double> to_array(const Eigen::VectorXd& v) {
  py::array_t<double> out(v.size());
  std::copy(v.data(), v.data() + v.size(), out.mutable_data());
  return out;
}

py::tuple to_tuple(const IndexVector& v) {
  py::tuple t(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) t[k] = v[k];
  return t;
}

py::list to_list(const std::vector<IndexVector>& vs) {
  py::list out;
  for (const auto& v : vs) out.append(to_tuple(v));
  return out;
}

SpacePtr space_for(const RawTensor& x, bool exclude_zeros) {
  return exclude_zeros ? std::make_shared<const SampleSpace>(nonzero_sample_space(x))
                       : std::make_shared<const SampleSpace>(x.shape());
}

SolverConfig make_config(const std::string& algorithm, double learning_rate, double tolerance,
                         std::optional<long> max_iterations, double damping, bool trace) {
  SolverConfig c;
  c.algorithm = parse_algorithm(algorithm);
  c.learning_rate = learning_rate;
  c.tolerance = tolerance;
  c.max_iterations = max_iterations;
  c.damping = damping;
  c.record_trace = trace;
  return c;
}

py::dict result_dict(const DecompositionResult& r) {
  py::dict d;
  d["q"] = to_array(denormalize(r.q));
  d["basis"] = to_list(r.theta.basis->members());
  d["theta"] = to_array(r.theta.values);
  d["eta"] = to_array(r.eta.values);
  d["eta_hat"] = to_array(r.eta_hat.values);
  d["pruned"] = to_list(r.pruned);
  d["psi"] = r.psi;
  d["kl"] = r.kl;
  d["max_residual"] = r.max_residual;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["wall_time"] = r.wall_time.count();
  py::list trace;
  for (const auto& t : r.trace) trace.append(py::make_tuple(t.iteration, t.kl, t.max_residual, t.wall_time_ms));
  d["trace"] = trace;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Legendre decomposition of nonnegative tensors";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "decompose",
      [](const Array& x, const std::string& basis, const std::string& algorithm, double learning_rate,
         double tolerance, std::optional<long> max_iterations, double damping, bool exclude_zeros, bool trace) {
        const RawTensor t = to_tensor(x);
        auto space = space_for(t, exclude_zeros);
        const NormalizedTensor p = normalize(t, space);
        auto b = std::make_shared<const Basis>(parse_basis_spec(basis, space, &p));
        const SolverConfig cfg = make_config(algorithm, learning_rate, tolerance, max_iterations, damping, trace);
        DecompositionResult r;
        {
          py::gil_scoped_release release;
          r = decompose(p, b, cfg);
        }
        return result_dict(r);
      },
      py::arg("x"), py::arg("basis") = "b1", py::arg("algorithm") = "ng", py::arg("learning_rate") = 0.1,
      py::arg("tolerance") = 1e-5, py::arg("max_iterations") = py::none(), py::arg("damping") = 0.0,
      py::arg("exclude_zeros") = false, py::arg("trace") = false,
      "Fit Q to x over a basis spec; returns q (same scale as x), theta, eta, psi, kl and diagnostics.");

  m.def(
      "basis",
      [](const std::string& spec, std::optional<std::vector<int>> shape, std::optional<Array> x, bool exclude_zeros) {
        if (x) {
          const RawTensor t = to_tensor(*x);
          auto space = space_for(t, exclude_zeros);
          const NormalizedTensor p = normalize(t, space);
          return to_list(parse_basis_spec(spec, space, &p).members());
        }
        if (!shape) throw DomainError("basis needs a shape or a tensor");
        return to_list(parse_basis_spec(spec, std::make_shared<const SampleSpace>(Shape(*shape))).members());
      },
      py::arg("spec"), py::arg("shape") = py::none(), py::arg("x") = py::none(), py::arg("exclude_zeros") = false,
      "Members of a basis as 1-based index tuples in lexicographic order.");

  m.def(
      "normalize",
      [](const Array& x) {
        const NormalizedTensor p = normalize(to_tensor(x));
        Array probs(x.request().shape);
        std::copy(p.probs.begin(), p.probs.end(), probs.mutable_data());
        return py::make_tuple(probs, p.total_mass);
      },
      py::arg("x"), "Probabilities over the full grid and the total mass.");

  m.def(
      "reference_projection",
      [](const Array& x, const std::string& basis, double tol) {
        const NormalizedTensor p = normalize(to_tensor(x));
        const Basis b = parse_basis_spec(basis, p.space, &p);
        return to_array(denormalize(reference_projection(p, b, tol)));
      },
      py::arg("x"), py::arg("basis"), py::arg("tol") = 1e-10,
      "Iterative proportional scaling onto the basis moments; small problems only.");

  m.def("rmse", [](const Array& x, const Array& y) { return rmse(to_tensor(x), to_tensor(y)); }, py::arg("x"),
        py::arg("x_hat"));

  m.def(
      "synthetic_tensor",
      [](const std::vector<int>& shape, std::uint64_t seed) { return to_array(synthetic_tensor(Shape(shape), seed)); },
      py::arg("shape"), py::arg("seed") = 0, "Reproducible i.i.d. Uniform(0,1) entries.");

  m.def(
      "load_tensor",
      [](const std::string& path, const std::string& format) {
        return to_array(load_tensor_file(path, parse_tensor_format(format)));
      },
      py::arg("path"), py::arg("format") = "dense");

  m.def(
      "fit_boltzmann",
      [](const Array& empirical, int n, const std::vector<std::pair<int, int>>& edges, double tolerance) {
        const BoltzmannGraph g(n, edges);
        const NormalizedTensor p = normalize(to_tensor(empirical));
        SolverConfig cfg;
        cfg.tolerance = tolerance;
        const BoltzmannFit f = fit_boltzmann(p, g, cfg);
        py::dict d;
        d["biases"] = f.biases;
        py::list w;
        for (const auto& e : f.weights) w.append(py::make_tuple(e.a, e.b, e.value));
        d["weights"] = w;
        d["log_partition"] = f.log_partition;
        d["result"] = result_dict(f.result);
        return d;
      },
      py::arg("empirical"), py::arg("n"), py::arg("edges"), py::arg("tolerance") = 1e-10,
      "Exact maximum-likelihood fit of a fully visible Boltzmann machine on {0,1}^n.");
}
