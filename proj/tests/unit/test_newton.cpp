#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "stoc/newton.hpp"

using namespace stoc;

namespace {
SystemOperator small_operator(int d, std::size_t n_x, std::size_t n_t, double rho) {
  return SystemOperator(SimplicialMesh::structured(d, n_x), TemporalMesh(1.0, n_t), rho);
}
}  // namespace

TEST_CASE("box constraints enforce their invariants") {
  CHECK_THROWS_AS(BoxConstraints::constant(3, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(BoxConstraints::constant(3, 1.0, 2.0), std::invalid_argument);   // 0 not admissible
  CHECK_THROWS_AS(BoxConstraints::constant(3, -2.0, -1.0), std::invalid_argument);
  CHECK_NOTHROW(BoxConstraints::constant(3, 0.0, 0.8));
  CHECK_NOTHROW(BoxConstraints::constant(3, -1e6, 1e6));
}

TEST_CASE("classification follows the sign conditions") {
  const BoxConstraints box = BoxConstraints::constant(3, 0.0, 0.8);
  const std::vector<double> u = {0.9, 0.4, -0.2};
  const std::vector<double> lambda = {0.0, 0.0, 0.0};
  const ActiveSetPartition p = classify_active_sets(u, lambda, box, 1.0);
  CHECK(p.state[0] == ActiveSetPartition::upper_active);  // 0 + (0.8-0.9) < 0
  CHECK(p.state[1] == ActiveSetPartition::inactive);
  CHECK(p.state[2] == ActiveSetPartition::lower_active);  // 0 + (0 - (-0.2)) > 0
  CHECK(p.count(ActiveSetPartition::lower_active) + p.count(ActiveSetPartition::upper_active) +
            p.count(ActiveSetPartition::inactive) ==
        3);
}

TEST_CASE("semismooth residual cases") {
  const SystemOperator op = small_operator(1, 4, 2, 0.1);
  const std::size_t n = op.layout().size();
  const BoxConstraints box = BoxConstraints::constant(n, -0.5, 0.7);

  // λ_j = 0, u strictly inside -> F2 = 0
  std::vector<double> u(n, 0.1), lambda(n, 0.0), f(n, 0.0);
  auto [f1a, f2a] = semismooth_residual(u, lambda, f, op, box, 1.0);
  for (double v : f2a) CHECK(v == 0.0);

  // upper-active consistency: λ_j = -2, u_j = u_+ -> F2_j = 0
  std::vector<double> u2(n, 0.7), lambda2(n, -2.0);
  auto [f1b, f2b] = semismooth_residual(u2, lambda2, f, op, box, 1.0);
  for (double v : f2b) CHECK(v == doctest::Approx(0.0));

  // F1 = K u - λ - f
  std::vector<double> ku(n);
  op.apply(u2, ku);
  for (std::size_t j = 0; j < n; ++j) CHECK(f1b[j] == doctest::Approx(ku[j] + 2.0).epsilon(1e-13));
}

TEST_CASE("reduced operator: degenerate partitions and the dense restriction oracle") {
  const SystemOperator op = small_operator(1, 5, 3, 0.08);
  const std::size_t n = op.layout().size();

  ActiveSetPartition none;
  none.state.assign(n, ActiveSetPartition::inactive);
  ActiveSetPartition all;
  all.state.assign(n, ActiveSetPartition::upper_active);

  const auto v = oracles::random_vector(n, 31);
  std::vector<double> w1(n), w2(n);
  apply_reduced_operator(op, none, v, w1);
  op.apply(v, w2);
  for (std::size_t j = 0; j < n; ++j) CHECK(w1[j] == doctest::Approx(w2[j]).epsilon(1e-14));

  apply_reduced_operator(op, all, v, w1);
  for (std::size_t j = 0; j < n; ++j) CHECK(w1[j] == v[j]);

  // random partition vs dense oracle with injected identity rows/columns
  ActiveSetPartition mixed;
  mixed.state.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    mixed.state[j] = j % 4 == 0   ? ActiveSetPartition::lower_active
                     : j % 4 == 2 ? ActiveSetPartition::upper_active
                                  : ActiveSetPartition::inactive;
  const DenseMatrix k = op.assemble_dense(OperatorKind::system);
  DenseMatrix reduced(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (mixed.is_active(i) || mixed.is_active(j))
        reduced(i, j) = i == j ? 1.0 : 0.0;
      else
        reduced(i, j) = k(i, j);
    }
  std::vector<double> expected(n);
  apply_reduced_operator(op, mixed, v, w1);
  reduced.multiply(v, expected);
  for (std::size_t j = 0; j < n; ++j) CHECK(w1[j] == doctest::Approx(expected[j]).epsilon(1e-12));

  // SPD on random vectors
  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto z = oracles::random_vector(n, 100 + seed);
    apply_reduced_operator(op, mixed, z, w1);
    CHECK(dot(z, w1) > 0.0);
  }
}

TEST_CASE("newton step with huge bounds solves the unconstrained gradient equation") {
  const SystemOperator op = small_operator(1, 4, 4, 0.0625);
  const std::size_t n = op.layout().size();
  const auto f = op.assemble_load([](const std::array<double, 3>& x, double t) {
    return std::sin(3.141592653589793 * x[0]) * std::sin(3.141592653589793 * t);
  });
  const BoxConstraints box = BoxConstraints::constant(n, -1e6, 1e6);
  NewtonConfig config;
  config.omega = 1.0;

  std::vector<double> u0(n, 0.0), l0(n, 0.0);
  const NewtonStepResult step = newton_step(op, f, box, config, u0, l0);
  CHECK(step.partition.count(ActiveSetPartition::inactive) == n);

  const DenseMatrix k = op.assemble_dense(OperatorKind::system);
  const auto u_direct = oracles::dense_solve(k, f);
  for (std::size_t j = 0; j < n; ++j) CHECK(step.u[j] == doctest::Approx(u_direct[j]).epsilon(1e-8));
  for (double v : step.lambda) CHECK(v == 0.0);
}

TEST_CASE("one step pins everything to a nearly degenerate upper bound") {
  const SystemOperator op = small_operator(1, 4, 3, 0.01);
  const std::size_t n = op.layout().size();
  REQUIRE(n <= 9);
  const auto f = op.assemble_load([](const std::array<double, 3>&, double) { return 1.0; });  // target far above
  const BoxConstraints box = BoxConstraints::constant(n, -1e-3, 0.0);
  NewtonConfig config;
  config.omega = 1.0;

  NewtonResult result = newton_solve(op, f, box, config);
  REQUIRE(result.converged);
  CHECK(result.partition.count(ActiveSetPartition::upper_active) == n);
  for (std::size_t j = 0; j < n; ++j) CHECK(result.u[j] == doctest::Approx(0.0));
  // λ = K ũ - f = -f <= 0 componentwise (upper-active sign condition)
  for (std::size_t j = 0; j < n; ++j) CHECK(result.lambda[j] == doctest::Approx(-f[j]).epsilon(1e-12));

  // matches the exhaustive QP oracle
  const DenseMatrix k = op.assemble_dense(OperatorKind::system);
  const auto qp = oracles::qp_enumerate(k, f, box.lower, box.upper);
  REQUIRE(qp.has_value());
  for (std::size_t j = 0; j < n; ++j) CHECK(result.u[j] == doctest::Approx((*qp)[j]).epsilon(1e-8).scale(1.0));
}

TEST_CASE("F1 vanishes after every step") {
  const SystemOperator op = small_operator(1, 5, 3, 0.04);
  const std::size_t n = op.layout().size();
  const auto f = op.assemble_load([](const std::array<double, 3>& x, double t) { return x[0] + t; });
  const BoxConstraints box = BoxConstraints::constant(n, -0.05, 0.12);
  NewtonConfig config;

  std::vector<double> u(n), lambda(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = 0.5 * (box.lower[j] + box.upper[j]);
  op.apply(u, lambda);
  for (std::size_t j = 0; j < n; ++j) lambda[j] -= f[j];

  for (int it = 0; it < 4; ++it) {
    const NewtonStepResult step = newton_step(op, f, box, config, u, lambda);
    auto [f1, f2] = semismooth_residual(step.u, step.lambda, f, op, box, config.c);
    CHECK(norm_inf(f1) <= 10.0 * config.cg_rel_tol * norm2(f) + 1e-14);
    for (std::size_t j = 0; j < n; ++j) {
      u[j] = (1.0 - config.omega) * u[j] + config.omega * step.u[j];
      lambda[j] = (1.0 - config.omega) * lambda[j] + config.omega * step.lambda[j];
    }
  }
}

TEST_CASE("newton solve matches the QP enumeration oracle on tiny instances") {
  struct Case {
    int d;
    std::size_t n_x, n_t;
    double lo, hi;
    unsigned seed;
  };
  for (const Case c : {Case{1, 2, 4, -0.1, 0.15, 1}, Case{1, 3, 3, -0.3, 0.5, 2}, Case{1, 4, 2, -0.02, 0.04, 3},
                       Case{1, 2, 6, 0.0, 0.07, 4}}) {
    const SystemOperator op = small_operator(c.d, c.n_x, c.n_t, 0.05);
    const std::size_t n = op.layout().size();
    REQUIRE(n <= 6);
    auto f = oracles::random_vector(n, c.seed);
    for (double& v : f) v *= 0.05;

    const BoxConstraints box = BoxConstraints::constant(n, c.lo, c.hi);
    NewtonConfig config;
    config.omega = 1.0;
    const NewtonResult result = newton_solve(op, f, box, config);
    REQUIRE(result.converged);

    const DenseMatrix k = op.assemble_dense(OperatorKind::system);
    const auto qp = oracles::qp_enumerate(k, f, box.lower, box.upper);
    REQUIRE(qp.has_value());
    for (std::size_t j = 0; j < n; ++j) CHECK(result.u[j] == doctest::Approx((*qp)[j]).epsilon(1e-8).scale(1.0));

    // discrete VI for single-dof moves to either bound
    std::vector<double> lambda(n);
    op.apply(result.u, lambda);
    for (std::size_t j = 0; j < n; ++j) lambda[j] -= f[j];
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(lambda[j] * (box.lower[j] - result.u[j]) >= -1e-9);
      CHECK(lambda[j] * (box.upper[j] - result.u[j]) >= -1e-9);
    }
  }
}

TEST_CASE("nodal (non-constant) bounds match the QP oracle") {
  const SystemOperator op = small_operator(1, 3, 3, 0.05);
  const std::size_t n = op.layout().size();
  REQUIRE(n == 6);
  std::vector<double> lower(n), upper(n);
  const auto noise = oracles::random_vector(2 * n, 17);
  for (std::size_t j = 0; j < n; ++j) {
    lower[j] = -0.2 + 0.1 * noise[j];          // within [-0.3, -0.1]
    upper[j] = 0.15 + 0.1 * noise[n + j];      // within [0.05, 0.25]
  }
  const BoxConstraints box(lower, upper);
  auto f = oracles::random_vector(n, 18);
  for (double& v : f) v *= 0.05;

  NewtonConfig config;
  config.omega = 1.0;
  const NewtonResult result = newton_solve(op, f, box, config);
  REQUIRE(result.converged);
  const DenseMatrix k = op.assemble_dense(OperatorKind::system);
  const auto qp = oracles::qp_enumerate(k, f, lower, upper);
  REQUIRE(qp.has_value());
  for (std::size_t j = 0; j < n; ++j) CHECK(result.u[j] == doctest::Approx((*qp)[j]).epsilon(1e-8).scale(1.0));
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(result.u[j] >= lower[j] - 1e-10);
    CHECK(result.u[j] <= upper[j] + 1e-10);
  }
}

TEST_CASE("damped newton solve converges with partition stability and small increments") {
  const SystemOperator op = small_operator(1, 6, 6, 1.0 / 36.0);
  const std::size_t n = op.layout().size();
  const auto f = op.assemble_load([](const std::array<double, 3>& x, double t) {
    return std::sin(3.141592653589793 * x[0]) * std::sin(3.141592653589793 * t);
  });
  const BoxConstraints box = BoxConstraints::constant(n, 0.0, 0.4);
  NewtonConfig config;  // omega = 0.1 defaults
  const NewtonResult result = newton_solve(op, f, box, config);
  REQUIRE(result.converged);
  CHECK(result.history.size() >= 2);
  CHECK(result.history.back().increment < config.increment_tol);

  // the returned pair reproduces its own partition, which is what makes the
  // bound satisfaction below exact rather than approximate
  CHECK(classify_active_sets(result.u, result.lambda, box, config.c) == result.partition);

  // final iterate: feasibility, complementarity, sign conditions
  auto [f1, f2] = semismooth_residual(result.u, result.lambda, f, op, box, config.c);
  CHECK(norm_inf(f2) <= 1e-6);
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(result.u[j] >= box.lower[j] - 1e-8);
    CHECK(result.u[j] <= box.upper[j] + 1e-8);
    if (result.partition.state[j] == ActiveSetPartition::upper_active) CHECK(result.lambda[j] <= 1e-8);
    if (result.partition.state[j] == ActiveSetPartition::lower_active) CHECK(result.lambda[j] >= -1e-8);
    if (result.partition.state[j] == ActiveSetPartition::inactive) CHECK(std::abs(result.lambda[j]) <= 1e-8);
  }

  // partition sets disjoint and covering at every recorded iteration
  for (const auto& rec : result.history)
    CHECK(rec.lower_active + rec.upper_active + rec.inactive == n);
}

TEST_CASE("inner CG non-convergence propagates as a step failure") {
  const SystemOperator op = small_operator(1, 6, 6, 0.03);
  const std::size_t n = op.layout().size();
  const auto f = op.assemble_load([](const std::array<double, 3>&, double) { return 1.0; });
  const BoxConstraints box = BoxConstraints::constant(n, -1.0, 1.0);
  NewtonConfig config;
  config.max_cg = 1;  // cannot converge at tol 1e-10
  std::vector<double> u(n, 0.0), lambda(n, 0.0);
  CHECK_THROWS_AS((void)newton_step(op, f, box, config, u, lambda), std::runtime_error);
}

TEST_CASE("discrete VI holds for single-dof moves to either bound at convergence") {
  // exhaustive single-coordinate test vectors on a ~200 dof instance
  const SystemOperator op = small_operator(1, 11, 20, 0.05);
  const std::size_t n = op.layout().size();
  REQUIRE(n == 200);
  const auto f = op.assemble_load([](const std::array<double, 3>& x, double t) {
    return std::sin(3.141592653589793 * x[0]) * std::sin(3.141592653589793 * t);
  });
  const BoxConstraints box = BoxConstraints::constant(n, 0.0, 0.25);
  NewtonConfig config;
  config.omega = 1.0;
  const NewtonResult result = newton_solve(op, f, box, config);
  REQUIRE(result.converged);

  std::vector<double> lambda(n);
  op.apply(result.u, lambda);
  for (std::size_t j = 0; j < n; ++j) lambda[j] -= f[j];
  // (K u, v - u) >= (f, v - u) for v = u ± single-dof move reduces to
  // λ_j (bound_j - u_j) >= 0
  for (std::size_t j = 0; j < n; ++j) {
    CHECK(lambda[j] * (box.lower[j] - result.u[j]) >= -1e-9);
    CHECK(lambda[j] * (box.upper[j] - result.u[j]) >= -1e-9);
  }
}

TEST_CASE("max_newton exhaustion reports non-convergence with history") {
  const SystemOperator op = small_operator(1, 4, 4, 0.0625);
  const std::size_t n = op.layout().size();
  const auto f = op.assemble_load([](const std::array<double, 3>&, double) { return 1.0; });
  const BoxConstraints box = BoxConstraints::constant(n, 0.0, 0.3);
  NewtonConfig config;
  config.omega = 0.1;
  config.max_newton = 3;  // far too few under damping
  const NewtonResult result = newton_solve(op, f, box, config);
  CHECK_FALSE(result.converged);
  CHECK(result.history.size() == 3);
}
