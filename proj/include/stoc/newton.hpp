#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stoc/krylov.hpp"
#include "stoc/spacetime.hpp"

namespace stoc {

/// Nodal box bounds I_h u_- <= u_h <= I_h u_+. Strict lower < upper is
/// required for the active-set classification to be mutually exclusive,
/// and 0 must be admissible.
struct BoxConstraints {
  BoxConstraints(std::vector<double> lower_values, std::vector<double> upper_values);
  static BoxConstraints constant(std::size_t size, double lower_value, double upper_value);

  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t size() const { return lower.size(); }
};

/// Disjoint covering of all dofs into lower-active, upper-active and
/// inactive index sets, stored as a signed state per dof.
struct ActiveSetPartition {
  enum State : std::int8_t { lower_active = -1, inactive = 0, upper_active = 1 };

  std::vector<std::int8_t> state;

  std::size_t size() const { return state.size(); }
  std::size_t count(State s) const;
  bool is_active(std::size_t j) const { return state[j] != 0; }
  bool operator==(const ActiveSetPartition& other) const { return state == other.state; }

  std::vector<std::uint8_t> active_mask() const;
};

struct NewtonConfig {
  double c = 1.0;                // complementarity parameter, > 0
  double omega = 0.1;            // underrelaxation factor in (0, 1]
  double increment_tol = 1e-3;   // infinity-norm stopping tolerance
  double cg_rel_tol = 1e-10;
  std::size_t max_newton = 200;
  std::size_t max_cg = 0;        // 0: 10 sqrt(n) + 100
};

struct NewtonIterationRecord {
  std::size_t lower_active = 0;
  std::size_t upper_active = 0;
  std::size_t inactive = 0;
  std::size_t cg_iterations = 0;
  double increment = 0.0;  // |u^{k+1}-u^k|_inf + |lambda^{k+1}-lambda^k|_inf
};

struct NewtonResult {
  std::vector<double> u;
  std::vector<double> lambda;
  ActiveSetPartition partition;
  std::vector<NewtonIterationRecord> history;
  bool converged = false;

  std::size_t total_cg_iterations() const;
};

/// Active-set classification: j is lower-active iff
/// λ_j + c(u_-,j - u_j) > 0, upper-active iff λ_j + c(u_+,j - u_j) < 0,
/// inactive otherwise. With strict lower < upper and c > 0 the two active
/// conditions exclude each other.
ActiveSetPartition classify_active_sets(std::span<const double> u, std::span<const double> lambda,
                                        const BoxConstraints& constraints, double c);

/// F1 = K_h u - λ - f;  F2_j = λ_j - min{0, λ_j + c(u_+ - u)_j} - max{0, λ_j + c(u_- - u)_j}.
std::pair<std::vector<double>, std::vector<double>> semismooth_residual(std::span<const double> u,
                                                                        std::span<const double> lambda,
                                                                        std::span<const double> f,
                                                                        const SystemOperator& op,
                                                                        const BoxConstraints& constraints, double c);

/// w = P_Iᵀ R_I K_h P_I v on the inactive block, identity on the active
/// block; SPD on the full space.
void apply_reduced_operator(const SystemOperator& op, const ActiveSetPartition& partition,
                            std::span<const double> v, std::span<double> w);

struct NewtonStepResult {
  std::vector<double> u;       // full step ũ
  std::vector<double> lambda;  // full step λ̃
  ActiveSetPartition partition;
  SolveReport cg_report;
};

/// One semi-smooth Newton step: classify, fix active dofs to their bounds,
/// solve the reduced SPD system on the inactive set by preconditioned CG
/// (mass diagonal, active entries one, zero initial guess), then recover
/// the multiplier exactly from F1 = 0 on the active set.
NewtonStepResult newton_step(const SystemOperator& op, std::span<const double> f, const BoxConstraints& constraints,
                             const NewtonConfig& config, std::span<const double> u, std::span<const double> lambda);

/// Damped active-set iteration: (u,λ) <- (1-ω)(u,λ) + ω(ũ,λ̃). Terminates
/// when the partition repeats and (for ω < 1) the damped increment has
/// dropped below increment_tol; the returned pair is the last computed full
/// step, which solves its partition's system exactly. Default initial guess
/// u⁰ = (u_- + u_+)/2, λ⁰ = K_h u⁰ - f.
NewtonResult newton_solve(const SystemOperator& op, std::span<const double> f, const BoxConstraints& constraints,
                          const NewtonConfig& config,
                          std::optional<std::pair<std::vector<double>, std::vector<double>>> initial = std::nullopt);

}  // namespace stoc
