#include "stoc/newton.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stoc {

BoxConstraints::BoxConstraints(std::vector<double> lower_values, std::vector<double> upper_values)
    : lower(std::move(lower_values)), upper(std::move(upper_values)) {
  if (lower.size() != upper.size()) throw std::invalid_argument("BoxConstraints: size mismatch");
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) throw std::invalid_argument("BoxConstraints: lower must be strictly below upper");
    if (lower[j] > 0.0 || upper[j] < 0.0) throw std::invalid_argument("BoxConstraints: zero must be admissible");
  }
}

BoxConstraints BoxConstraints::constant(std::size_t size, double lower_value, double upper_value) {
  return BoxConstraints(std::vector<double>(size, lower_value), std::vector<double>(size, upper_value));
}

std::size_t ActiveSetPartition::count(State s) const {
  return static_cast<std::size_t>(std::count(state.begin(), state.end(), static_cast<std::int8_t>(s)));
}

std::vector<std::uint8_t> ActiveSetPartition::active_mask() const {
  std::vector<std::uint8_t> mask(state.size());
  for (std::size_t j = 0; j < state.size(); ++j) mask[j] = state[j] != 0 ? 1 : 0;
  return mask;
}

ActiveSetPartition classify_active_sets(std::span<const double> u, std::span<const double> lambda,
                                        const BoxConstraints& constraints, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("classify_active_sets: c must be positive");
  const std::size_t n = u.size();
  if (lambda.size() != n || constraints.size() != n)
    throw std::invalid_argument("classify_active_sets: dimension mismatch");
  ActiveSetPartition partition;
  partition.state.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (lambda[j] + c * (constraints.lower[j] - u[j]) > 0.0)
      partition.state[j] = ActiveSetPartition::lower_active;
    else if (lambda[j] + c * (constraints.upper[j] - u[j]) < 0.0)
      partition.state[j] = ActiveSetPartition::upper_active;
    else
      partition.state[j] = ActiveSetPartition::inactive;
  }
  return partition;
}

std::pair<std::vector<double>, std::vector<double>> semismooth_residual(std::span<const double> u,
                                                                        std::span<const double> lambda,
                                                                        std::span<const double> f,
                                                                        const SystemOperator& op,
                                                                        const BoxConstraints& constraints, double c) {
  const std::size_t n = u.size();
  std::vector<double> f1(n), f2(n);
  op.apply(u, f1);
  for (std::size_t j = 0; j < n; ++j) f1[j] -= lambda[j] + f[j];
  for (std::size_t j = 0; j < n; ++j) {
    const double up = lambda[j] + c * (constraints.upper[j] - u[j]);
    const double low = lambda[j] + c * (constraints.lower[j] - u[j]);
    f2[j] = lambda[j] - std::min(0.0, up) - std::max(0.0, low);
  }
  return {std::move(f1), std::move(f2)};
}

void apply_reduced_operator(const SystemOperator& op, const ActiveSetPartition& partition,
                            std::span<const double> v, std::span<double> w) {
  const std::size_t n = v.size();
  if (w.size() != n || partition.size() != n)
    throw std::invalid_argument("apply_reduced_operator: dimension mismatch");
  thread_local std::vector<double> masked;  // called once per inner CG iteration
  if (masked.size() < n) masked.resize(n);
  for (std::size_t j = 0; j < n; ++j) masked[j] = partition.is_active(j) ? 0.0 : v[j];
  op.apply(std::span<const double>(masked.data(), n), w);
  for (std::size_t j = 0; j < n; ++j)
    if (partition.is_active(j)) w[j] = v[j];
}

NewtonStepResult newton_step(const SystemOperator& op, std::span<const double> f, const BoxConstraints& constraints,
                             const NewtonConfig& config, std::span<const double> u, std::span<const double> lambda) {
  const std::size_t n = f.size();
  NewtonStepResult step;
  step.partition = classify_active_sets(u, lambda, constraints, config.c);

  // right-hand side f - K_h ũ_A with the active dofs pinned to their bounds
  std::vector<double> u_active(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (step.partition.state[j] == ActiveSetPartition::lower_active) u_active[j] = constraints.lower[j];
    if (step.partition.state[j] == ActiveSetPartition::upper_active) u_active[j] = constraints.upper[j];
  }
  std::vector<double> rhs(n);
  op.apply(u_active, rhs);
  for (std::size_t j = 0; j < n; ++j) rhs[j] = step.partition.is_active(j) ? 0.0 : f[j] - rhs[j];

  const std::vector<std::uint8_t> mask = step.partition.active_mask();
  const JacobiPreconditioner precond =
      JacobiPreconditioner::mass_diagonal(op.temporal_mass(), op.spatial_mass(), &mask);
  const std::size_t max_cg = config.max_cg > 0 ? config.max_cg : default_max_iterations(n);

  auto [u_inactive, report] = pcg_solve(
      [&](std::span<const double> in, std::span<double> out) { apply_reduced_operator(op, step.partition, in, out); },
      rhs, precond, config.cg_rel_tol, max_cg);
  if (!report.converged) throw std::runtime_error("newton_step: inner CG did not converge");
  step.cg_report = std::move(report);

  // ũ = ũ_I ⊕ bound values; CG kept the active components at exactly zero
  step.u = std::move(u_inactive);
  for (std::size_t j = 0; j < n; ++j)
    if (step.partition.is_active(j)) step.u[j] = u_active[j];

  // multiplier from F1 = 0 on the active set (λ̃ = 0 on the inactive set);
  // this carries the inactive-to-active coupling of the eliminated system
  step.lambda.assign(n, 0.0);
  std::vector<double> ku(n);
  op.apply(step.u, ku);
  for (std::size_t j = 0; j < n; ++j)
    if (step.partition.is_active(j)) step.lambda[j] = ku[j] - f[j];
  return step;
}

std::size_t NewtonResult::total_cg_iterations() const {
  std::size_t total = 0;
  for (const auto& rec : history) total += rec.cg_iterations;
  return total;
}

NewtonResult newton_solve(const SystemOperator& op, std::span<const double> f, const BoxConstraints& constraints,
                          const NewtonConfig& config,
                          std::optional<std::pair<std::vector<double>, std::vector<double>>> initial) {
  const std::size_t n = f.size();
  if (constraints.size() != n) throw std::invalid_argument("newton_solve: dimension mismatch");
  if (!(config.omega > 0.0 && config.omega <= 1.0)) throw std::invalid_argument("newton_solve: omega must be in (0,1]");

  std::vector<double> u, lambda;
  if (initial) {
    u = std::move(initial->first);
    lambda = std::move(initial->second);
    if (u.size() != n || lambda.size() != n) throw std::invalid_argument("newton_solve: initial guess size mismatch");
  } else {
    u.resize(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = 0.5 * (constraints.lower[j] + constraints.upper[j]);
    lambda.resize(n);
    op.apply(u, lambda);
    for (std::size_t j = 0; j < n; ++j) lambda[j] -= f[j];
  }

  NewtonResult result;
  std::optional<ActiveSetPartition> previous_partition;
  std::vector<double> last_step_u, last_step_lambda;
  bool last_step_self_consistent = false;
  double last_increment = 0.0;

  for (std::size_t k = 0; k < config.max_newton; ++k) {
    ActiveSetPartition partition = classify_active_sets(u, lambda, constraints, config.c);
    // The returned pair is the last full step, so beyond the stated rule
    // (repeating partition, small damped increment) the step must also
    // reproduce its own active set: inactivity under its own classification
    // is what guarantees the returned state respects the bounds exactly.
    if (previous_partition && partition == *previous_partition && last_step_self_consistent &&
        (config.omega == 1.0 || last_increment < config.increment_tol)) {
      result.u = std::move(last_step_u);
      result.lambda = std::move(last_step_lambda);
      result.partition = std::move(partition);
      result.converged = true;
      return result;
    }

    NewtonStepResult step = newton_step(op, f, constraints, config, u, lambda);

    // damped increment |u^{k+1}-u^k|_inf + |λ^{k+1}-λ^k|_inf = ω(|ũ-u^k|_inf + |λ̃-λ^k|_inf)
    double du = 0.0, dl = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      du = std::max(du, std::abs(step.u[j] - u[j]));
      dl = std::max(dl, std::abs(step.lambda[j] - lambda[j]));
    }
    const double increment = config.omega * (du + dl);
    for (std::size_t j = 0; j < n; ++j) {
      u[j] = (1.0 - config.omega) * u[j] + config.omega * step.u[j];
      lambda[j] = (1.0 - config.omega) * lambda[j] + config.omega * step.lambda[j];
    }

    result.history.push_back({step.partition.count(ActiveSetPartition::lower_active),
                              step.partition.count(ActiveSetPartition::upper_active),
                              step.partition.count(ActiveSetPartition::inactive), step.cg_report.iterations,
                              increment});
    last_increment = increment;
    last_step_self_consistent =
        classify_active_sets(step.u, step.lambda, constraints, config.c) == step.partition;
    previous_partition = std::move(step.partition);
    last_step_u = std::move(step.u);
    last_step_lambda = std::move(step.lambda);
  }

  result.u = std::move(u);
  result.lambda = std::move(lambda);
  result.partition = classify_active_sets(result.u, result.lambda, constraints, config.c);
  result.converged = false;
  return result;
}

}  // namespace stoc
