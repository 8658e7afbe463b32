#include "stoc/krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace stoc {

JacobiPreconditioner JacobiPreconditioner::mass_diagonal(const TriDiagonalMatrix& temporal_mass,
                                                         const SparseSymMatrix& spatial_mass,
                                                         const std::vector<std::uint8_t>* active_mask) {
  const std::size_t n_t = temporal_mass.size();
  const std::size_t m_x = spatial_mass.size();
  JacobiPreconditioner p;
  p.inv_diag_.resize(n_t * m_x);
  if (active_mask != nullptr && active_mask->size() != n_t * m_x)
    throw std::invalid_argument("JacobiPreconditioner: active mask size mismatch");
  for (std::size_t k = 0; k < n_t; ++k) {
    const double mt = temporal_mass.diag[k];
    for (std::size_t i = 0; i < m_x; ++i) {
      const std::size_t idx = k * m_x + i;
      const double d = (active_mask != nullptr && (*active_mask)[idx] != 0) ? 1.0 : mt * spatial_mass.diagonal(i);
      if (!(d > 0.0) || !std::isfinite(d))
        throw std::runtime_error("JacobiPreconditioner: nonpositive diagonal entry");
      p.inv_diag_[idx] = 1.0 / d;
    }
  }
  return p;
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
}

std::size_t default_max_iterations(std::size_t n) {
  return static_cast<std::size_t>(10.0 * std::sqrt(static_cast<double>(n))) + 100;
}

std::pair<std::vector<double>, SolveReport> pcg_solve(const LinearMap& apply_op, std::span<const double> b,
                                                      const JacobiPreconditioner& preconditioner, double rel_tol,
                                                      std::size_t max_iterations) {
  const std::size_t n = b.size();
  if (preconditioner.size() != n) throw std::invalid_argument("pcg_solve: preconditioner size mismatch");
  std::vector<double> x(n, 0.0);
  SolveReport report;

  const double norm_b = norm2(b);
  if (norm_b == 0.0) {
    report.converged = true;
    return {std::move(x), report};
  }

  std::vector<double> r(b.begin(), b.end());
  std::vector<double> z(n), p(n), q(n);
  preconditioner.apply(r, z);
  double rz = dot(r, z);
  copy(z, p);
  report.precond_residual_norms.push_back(std::sqrt(std::max(rz, 0.0)));

  while (report.iterations < max_iterations) {
    apply_op(p, q);
    const double pq = dot(p, q);
    if (pq <= 0.0) throw std::runtime_error("pcg_solve: breakdown, operator is not positive definite on this subspace");
    const double alpha = rz / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    ++report.iterations;

    preconditioner.apply(r, z);
    const double rz_next = dot(r, z);
    report.precond_residual_norms.push_back(std::sqrt(std::max(rz_next, 0.0)));

    if (norm2(r) <= rel_tol * norm_b) {
      // recurrence drift guard: one explicit recomputation
      apply_op(x, q);
      for (std::size_t i = 0; i < n; ++i) q[i] = b[i] - q[i];
      const double true_res = norm2(q);
      if (true_res <= rel_tol * norm_b) {
        report.converged = true;
        report.rel_residual = true_res / norm_b;
        return {std::move(x), report};
      }
      copy(q, r);
      preconditioner.apply(r, z);
      rz = dot(r, z);
      copy(z, p);
      continue;
    }

    const double beta = rz_next / rz;
    rz = rz_next;
    xpby(z, beta, p);  // p = z + beta p
  }
  report.converged = false;
  report.rel_residual = norm2(r) / norm_b;
  return {std::move(x), report};
}

}  // namespace stoc
