#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stoc/la.hpp"

namespace stoc {

/// Reciprocal diagonal of the space-time mass matrix, optionally with
/// active-set entries replaced by one (the reduced system has an identity
/// block there).
class JacobiPreconditioner {
public:
  JacobiPreconditioner() = default;

  static JacobiPreconditioner mass_diagonal(const TriDiagonalMatrix& temporal_mass,
                                            const SparseSymMatrix& spatial_mass,
                                            const std::vector<std::uint8_t>* active_mask = nullptr);

  void apply(std::span<const double> r, std::span<double> z) const;
  std::span<const double> inverse_diagonal() const { return inv_diag_; }
  std::size_t size() const { return inv_diag_.size(); }

private:
  std::vector<double> inv_diag_;
};

struct SolveReport {
  std::size_t iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  /// sqrt(r_kᵀ z_k) per iteration, starting with the initial residual.
  std::vector<double> precond_residual_norms;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

std::size_t default_max_iterations(std::size_t n);

/// Preconditioned conjugate gradients with zero initial guess. The stopping
/// test uses the true (unpreconditioned) relative residual; at declared
/// convergence the residual is recomputed once from scratch to guard against
/// recurrence drift. A nonpositive pᵀAp aborts (operator not SPD).
std::pair<std::vector<double>, SolveReport> pcg_solve(const LinearMap& apply_op, std::span<const double> b,
                                                      const JacobiPreconditioner& preconditioner, double rel_tol,
                                                      std::size_t max_iterations);

}  // namespace stoc
