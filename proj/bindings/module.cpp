#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stoc/experiments.hpp"
#include "stoc/newton.hpp"

namespace py = pybind11;
using namespace stoc;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  std::vector<double> v(static_cast<std::size_t>(arr.size()));
  std::copy(arr.data(), arr.data() + arr.size(), v.begin());
  return v;
}

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> arr(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), arr.mutable_data());
  return arr;
}

py::array_t<double> to_matrix(const DenseMatrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.rows() * m.cols(), arr.mutable_data());
  return arr;
}

std::array<double, 3> to_point(const std::vector<double>& p, int dim) {
  if (static_cast<int>(p.size()) != dim) throw std::invalid_argument("point must have `dim` coordinates");
  std::array<double, 3> x = {0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < p.size(); ++a) x[a] = p[a];
  return x;
}

/// Space-time control problem on (0,1)^d x (0,1): operator, load vector and
/// the solvers, exposed operation-by-operation.
class Problem {
public:
  Problem(int dim, std::size_t n, std::optional<std::size_t> n_t, std::optional<double> rho,
          const std::string& target, int load_order_t, int load_order_x)
      : dim_(dim),
        target_(experiments::builtin_target(target, dim)),
        op_(SimplicialMesh::structured(dim, n), TemporalMesh(1.0, n_t ? *n_t : n),
            rho ? *rho : 1.0 / (static_cast<double>(n) * static_cast<double>(n))),
        load_(op_.assemble_load(target_, load_order_t, load_order_x)) {}

  std::size_t n_dofs() const { return op_.layout().size(); }
  std::size_t n_t() const { return op_.layout().n_t; }
  std::size_t m_x() const { return op_.layout().m_x; }
  double rho() const { return op_.rho(); }
  std::string eigenbasis_mode() const {
    return op_.eigenbasis().mode() == EigenbasisMode::fast_sine ? "fast-sine" : "dense";
  }
  py::array_t<double> eigenvalues() const { return to_array(op_.eigenbasis().eigenvalues()); }
  py::array_t<double> load() const { return to_array(load_); }

  py::array_t<double> apply(const py::array_t<double, py::array::c_style | py::array::forcecast>& v) const {
    auto in = to_vector(v);
    check_size(in.size());
    std::vector<double> out(in.size());
    op_.apply(in, out);
    return to_array(out);
  }

  py::array_t<double> apply_energy(const py::array_t<double, py::array::c_style | py::array::forcecast>& v) const {
    auto in = to_vector(v);
    check_size(in.size());
    std::vector<double> out(in.size());
    op_.apply_energy(in, out);
    return to_array(out);
  }

  double anisotropic_norm_sq(const py::array_t<double, py::array::c_style | py::array::forcecast>& v) const {
    auto in = to_vector(v);
    check_size(in.size());
    return op_.anisotropic_norm_sq(in);
  }

  py::array_t<double> recover_control(const py::array_t<double, py::array::c_style | py::array::forcecast>& u) const {
    auto in = to_vector(u);
    check_size(in.size());
    std::vector<double> out(in.size());
    op_.recover_control(in, out);
    return to_array(out);
  }

  py::array_t<double> dense_operator(const std::string& which) const {
    OperatorKind kind;
    if (which == "K")
      kind = OperatorKind::system;
    else if (which == "D")
      kind = OperatorKind::energy;
    else if (which == "B")
      kind = OperatorKind::control;
    else
      throw std::invalid_argument("which must be 'K', 'D' or 'B'");
    return to_matrix(op_.assemble_dense(kind));
  }

  py::array_t<double> temporal_mass() const { return to_matrix(op_.temporal_mass().to_dense()); }
  py::array_t<double> temporal_convection() const { return to_matrix(op_.temporal_convection().to_dense()); }
  py::array_t<double> temporal_stiffness() const {
    const DenseSymMatrix* a = op_.hilbert_stiffness();
    if (a == nullptr) throw std::runtime_error("dense temporal stiffness unavailable at this size");
    DenseMatrix d(a->size(), a->size());
    for (std::size_t i = 0; i < a->size(); ++i)
      for (std::size_t j = 0; j < a->size(); ++j) d(i, j) = (*a)(i, j);
    return to_matrix(d);
  }
  py::array_t<double> spatial_mass() const { return to_matrix(op_.spatial_mass().to_dense()); }
  py::array_t<double> spatial_stiffness() const { return to_matrix(op_.spatial_stiffness().to_dense()); }

  py::dict solve_unconstrained(double cg_tol) const {
    experiments::UnconstrainedSolve solve;
    {
      py::gil_scoped_release release;
      solve = experiments::solve_unconstrained(op_, load_, cg_tol);
    }
    py::dict out;
    out["u"] = to_array(solve.u);
    out["iterations"] = solve.report.iterations;
    out["rel_residual"] = solve.report.rel_residual;
    out["converged"] = solve.report.converged;
    return out;
  }

  py::dict solve_constrained(double lower, double upper, double c, double omega, double increment_tol, double cg_tol,
                             std::size_t max_newton) const {
    const BoxConstraints box = BoxConstraints::constant(n_dofs(), lower, upper);
    NewtonConfig config;
    config.c = c;
    config.omega = omega;
    config.increment_tol = increment_tol;
    config.cg_rel_tol = cg_tol;
    config.max_newton = max_newton;
    NewtonResult result;
    {
      py::gil_scoped_release release;
      result = newton_solve(op_, load_, box, config);
    }
    py::dict out;
    out["u"] = to_array(result.u);
    out["lambda"] = to_array(result.lambda);
    out["converged"] = result.converged;
    out["newton_iterations"] = result.history.size();
    out["total_cg"] = result.total_cg_iterations();
    std::vector<std::int64_t> states(result.partition.state.begin(), result.partition.state.end());
    out["partition"] = py::cast(states);
    return out;
  }

  double l2q_error(const py::array_t<double, py::array::c_style | py::array::forcecast>& u,
                   std::optional<std::pair<double, double>> bounds, int quad_order) const {
    auto in = to_vector(u);
    check_size(in.size());
    return experiments::l2q_error(op_, in, target_, bounds, quad_order);
  }

  py::dict trajectory(const py::array_t<double, py::array::c_style | py::array::forcecast>& u,
                      const std::vector<double>& point) const {
    auto in = to_vector(u);
    check_size(in.size());
    const auto traj = experiments::extract_trajectory(op_, in, to_point(point, dim_));
    std::vector<double> ts, vs;
    for (const auto& [t, v] : traj) {
      ts.push_back(t);
      vs.push_back(v);
    }
    py::dict out;
    out["t"] = to_array(ts);
    out["u"] = to_array(vs);
    return out;
  }

private:
  void check_size(std::size_t n) const {
    if (n != n_dofs()) throw std::invalid_argument("expected a vector of length n_dofs");
  }

  int dim_;
  TargetFunction target_;
  SystemOperator op_;
  std::vector<double> load_;
};

}  // namespace

PYBIND11_MODULE(_stoc, m) {
  m.doc() = "matrix-free space-time solver for state-constrained parabolic optimal control";

  py::class_<Problem>(m, "Problem")
      .def(py::init<int, std::size_t, std::optional<std::size_t>, std::optional<double>, const std::string&, int,
                    int>(),
           py::arg("dim"), py::arg("n"), py::arg("n_t") = std::nullopt, py::arg("rho") = std::nullopt,
           py::arg("target") = "sines", py::arg("load_order_t") = 3, py::arg("load_order_x") = 2)
      .def_property_readonly("n_dofs", &Problem::n_dofs)
      .def_property_readonly("n_t", &Problem::n_t)
      .def_property_readonly("m_x", &Problem::m_x)
      .def_property_readonly("rho", &Problem::rho)
      .def_property_readonly("eigenbasis_mode", &Problem::eigenbasis_mode)
      .def_property_readonly("eigenvalues", &Problem::eigenvalues)
      .def_property_readonly("load", &Problem::load)
      .def("apply", &Problem::apply, py::arg("v"), "w = K_h v (matrix-free)")
      .def("apply_energy", &Problem::apply_energy, py::arg("v"), "w = D v")
      .def("anisotropic_norm_sq", &Problem::anisotropic_norm_sq, py::arg("v"))
      .def("recover_control", &Problem::recover_control, py::arg("u"), "z = B_h u")
      .def("dense_operator", &Problem::dense_operator, py::arg("which"),
           "explicit Kronecker assembly of K, D or B (small problems)")
      .def("temporal_mass", &Problem::temporal_mass)
      .def("temporal_convection", &Problem::temporal_convection)
      .def("temporal_stiffness", &Problem::temporal_stiffness)
      .def("spatial_mass", &Problem::spatial_mass)
      .def("spatial_stiffness", &Problem::spatial_stiffness)
      .def("solve_unconstrained", &Problem::solve_unconstrained, py::arg("cg_tol") = 1e-10)
      .def("solve_constrained", &Problem::solve_constrained, py::arg("lower") = 0.0, py::arg("upper") = 0.8,
           py::arg("c") = 1.0, py::arg("omega") = 0.1, py::arg("increment_tol") = 1e-3, py::arg("cg_tol") = 1e-10,
           py::arg("max_newton") = 200)
      .def("l2q_error", &Problem::l2q_error, py::arg("u"), py::arg("bounds") = std::nullopt,
           py::arg("quad_order") = 5)
      .def("trajectory", &Problem::trajectory, py::arg("u"), py::arg("point"));

  m.def("builtin_targets", [] { return experiments::builtin_target_names(); });
  m.def("set_worker_threads", &set_worker_threads, py::arg("n"));
}
