#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "stoc/dst.hpp"
#include "stoc/la.hpp"

namespace stoc {

/// Uniform temporal mesh on (0, T). Nodes t_j = j h_t for j = 0..n_dofs;
/// the value at t = 0 is constrained to zero, so dof j corresponds to node
/// t_j for j = 1..n_dofs and the basis function at t = T is a half hat.
struct TemporalMesh {
  TemporalMesh(double horizon, std::size_t n_dofs);

  double horizon;      // T
  std::size_t n_dofs;  // N_t

  double dt() const { return horizon / static_cast<double>(n_dofs); }
  double node(std::size_t j) const { return static_cast<double>(j) * dt(); }
};

/// P1 temporal mass matrix: M[j,j] = 2h/3 (interior), M[N,N] = h/3, off h/6.
TriDiagonalMatrix assemble_temporal_mass(const TemporalMesh& mesh);

/// Temporal convection matrix G[l,k] = ∫ φ_k' φ_l dt. Skew dominant;
/// G + Gᵀ has the single nonzero entry 1 at (N,N).
TriDiagonalMatrix assemble_temporal_convection(const TemporalMesh& mesh);

/// Closed-form moment b_k[i] = ∫ φ_i(t) sin(λ_k t) dt with λ_k = (π/2 + kπ)/T.
/// k >= 0, dof index i in 1..N_t.
double hat_sine_moment(const TemporalMesh& mesh, std::size_t k, std::size_t i);

/// H^{1/2} temporal stiffness A[j,i] = <∂_t φ_i, H_T φ_j> assembled from the
/// sine series A = Σ_k (2/T) λ_k b_k b_kᵀ.
///
/// Truncation: a term is the last one retained when its relative max-norm
/// increment is below series_tol, k >= 4 N_t, and the analytic tail estimate
/// (increment · k/2, from the k^-3 decay) is below series_tol as well; the
/// plain increment test alone would leave a tail ~ (k/2)·series_tol behind.
/// Above direct_size_limit the same series is summed per alias class of the
/// sampled sine vectors (exact regrouping, see hilbert_alias_weights) which
/// needs O(N log N) work instead of ~1e4·N rank-one updates.
DenseSymMatrix assemble_hilbert_stiffness(const TemporalMesh& mesh, double series_tol,
                                          std::size_t max_terms = 1'000'000,
                                          std::size_t direct_size_limit = 8);

/// Term-by-term rank-one accumulation (exposed for cross-checking the
/// alias-folded path). Cost grows like 1e4·N_t rank-one updates at 1e-10.
DenseSymMatrix assemble_hilbert_stiffness_direct(const TemporalMesh& mesh, double series_tol,
                                                 std::size_t max_terms = 1'000'000);

/// Per-alias-class weights γ_j of the hilbert series: with the sampled sine
/// matrix S and the end-weighting E = diag(1,..,1,1/2) there holds exactly
/// A = E S diag(γ) Sᵀ E, where class j collects the frequencies
/// k ∈ {j + 2mN} ∪ {2N-1-j + 2mN}. Tail-corrected summation to ~1e-14.
std::vector<double> hilbert_alias_weights(const TemporalMesh& mesh);

enum class EigenbasisMode { dense, fast_sine };

/// Generalized eigenbasis of (A_{h_t}, M_{h_t}): ascending eigenvalues Λ and
/// M-orthonormal eigenvectors C (CᵀMC = I, hence C⁻¹ = CᵀM). The analysis
/// and synthesis maps are either explicit dense multiplications or sine
/// transforms (fast_sine mode).
class TemporalEigenbasis {
public:
  TemporalEigenbasis() = default;

  static TemporalEigenbasis make_dense(std::vector<double> eigenvalues, DenseMatrix vectors, TriDiagonalMatrix mass);
  static TemporalEigenbasis make_fast(std::vector<double> eigenvalues, std::vector<double> mode_scale,
                                      TriDiagonalMatrix mass);

  std::size_t size() const { return eigenvalues_.size(); }
  EigenbasisMode mode() const { return mode_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const TriDiagonalMatrix& mass() const { return mass_; }

  // All four maps accept a caller-provided scratch area of 2n doubles and
  // are safe to call concurrently with distinct buffers.

  /// vhat = Cᵀ M v (coefficients in the eigenbasis).
  void analysis(const double* v, double* vhat, double* scratch) const;
  /// v = C vhat.
  void synthesis(const double* vhat, double* v, double* scratch) const;
  /// out = C in
  void multiply_c(const double* in, double* out, double* scratch) const;
  /// out = Cᵀ in
  void multiply_ct(const double* in, double* out, double* scratch) const;

  /// Dense eigenvector matrix in either mode (test/inspection use).
  DenseMatrix materialize_vectors() const;
  const DenseMatrix& dense_vectors() const { return vectors_; }

private:
  EigenbasisMode mode_ = EigenbasisMode::dense;
  std::vector<double> eigenvalues_;
  TriDiagonalMatrix mass_;
  DenseMatrix vectors_;                        // dense mode
  std::vector<double> mode_scale_;             // fast mode: C = S diag(scale)
  std::shared_ptr<const SineTransform> dst_;   // fast mode
};

/// Dense route: M = LLᵀ reduction + standard symmetric eigensolve.
/// Throws if M is not positive definite.
TemporalEigenbasis solve_generalized_evp(const DenseSymMatrix& a, const TriDiagonalMatrix& m);

/// Fast route: candidate eigenvectors are the M-normalized nodal samples of
/// sin((π/2 + kπ) t/T), candidate eigenvalues their Rayleigh quotients.
/// Accepted iff ‖AC - MCΛ‖_max <= validate_tol · λ_max; rejection is not an
/// error, the caller falls back to solve_generalized_evp.
std::optional<TemporalEigenbasis> try_fast_eigenbasis(const TemporalMesh& mesh, const DenseSymMatrix& a,
                                                      const TriDiagonalMatrix& m, double validate_tol);

/// Fast basis without a dense A (sizes where series assembly is infeasible):
/// eigenvalues λ_j = (N/2) γ_j / m_j from the alias-class weights and the
/// sine-vector mass eigenvalue m_j = (h/3)(2 + cos θ_j). Cross-validated
/// against the dense route at moderate sizes in the test suite.
TemporalEigenbasis make_fast_eigenbasis_analytic(const TemporalMesh& mesh);

}  // namespace stoc
