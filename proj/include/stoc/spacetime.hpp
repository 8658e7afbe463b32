#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stoc/la.hpp"
#include "stoc/spatial.hpp"
#include "stoc/temporal.hpp"

namespace stoc {

/// Coefficient layout of space-time vectors: time-major, entry (k, i) for
/// temporal dof k = 1..N_t and spatial dof i = 0..M_x-1 sits at
/// (k-1)·M_x + i. This matches the Kronecker convention
/// (A ⊗ B)[(k-1)M_x+i, (l-1)M_x+j] = A[k,l]·B[i,j].
struct SpaceTimeLayout {
  std::size_t n_t = 0;
  std::size_t m_x = 0;
  std::size_t size() const { return n_t * m_x; }
  std::size_t index(std::size_t temporal_dof, std::size_t spatial_dof) const {
    return (temporal_dof - 1) * m_x + spatial_dof;
  }
};

using TargetFunction = std::function<double(const std::array<double, 3>&, double)>;

enum class OperatorKind { system, energy, control };

struct SystemOperatorOptions {
  double series_tol = 1e-10;
  std::size_t series_max_terms = 1'000'000;
  double fast_validate_tol = 1e-8;
  /// Above this N_t no dense temporal stiffness is assembled; the fast sine
  /// basis is built analytically instead.
  std::size_t dense_setup_limit = 1024;
  bool force_dense_eigenbasis = false;
};

/// Matrix-free space-time operator
///   K_h = M_t ⊗ M_x + ϱ (A_t ⊗ M_x + M_t ⊗ A_x)
/// applied through the temporal eigenbasis: the middle factor transforms to
/// Λ ⊗ M_x, so one application costs two temporal transforms plus exactly
/// two spatial matvecs per temporal slice,
///   w = (M_t C ⊗ I) [(I + ϱΛ) ⊗ M_x + ϱ I ⊗ A_x] (Cᵀ M_t ⊗ I) v.
/// Also carries the energy operator D = A_t ⊗ M_x + M_t ⊗ A_x and the
/// control recovery map B_h = G_t ⊗ M_x + M_t ⊗ A_x.
class SystemOperator {
public:
  SystemOperator(SimplicialMesh spatial_mesh, TemporalMesh temporal_mesh, double rho,
                 SystemOperatorOptions options = {});

  const SpaceTimeLayout& layout() const { return layout_; }
  double rho() const { return rho_; }

  /// w = K_h v
  void apply(std::span<const double> v, std::span<double> w) const;
  /// w = D v
  void apply_energy(std::span<const double> v, std::span<double> w) const;
  /// vᵀ D v >= 0 (the squared H^{1,1/2} norm of the FE function)
  double anisotropic_norm_sq(std::span<const double> v) const;
  /// z = B_h u (dual-vector representation of the recovered control)
  void recover_control(std::span<const double> u, std::span<double> z) const;

  /// Load vector f[(k,i)] = ∫_Q target · φ_k ψ_i by tensorized quadrature.
  std::vector<double> assemble_load(const TargetFunction& target, int temporal_order = 3,
                                    int spatial_order = 2) const;

  /// Explicit Kronecker assembly (test oracle / small direct solves);
  /// guarded to N_t·M_x <= 4096.
  DenseMatrix assemble_dense(OperatorKind which) const;

  const SimplicialMesh& spatial_mesh() const { return spatial_mesh_; }
  const TemporalMesh& temporal_mesh() const { return temporal_mesh_; }
  const TriDiagonalMatrix& temporal_mass() const { return temporal_mass_; }
  const TriDiagonalMatrix& temporal_convection() const { return temporal_convection_; }
  /// Dense temporal stiffness; absent above dense_setup_limit.
  const DenseSymMatrix* hilbert_stiffness() const { return hilbert_stiffness_ ? &*hilbert_stiffness_ : nullptr; }
  const TemporalEigenbasis& eigenbasis() const { return eigenbasis_; }
  const SparseSymMatrix& spatial_mass() const { return spatial_mass_; }
  const SparseSymMatrix& spatial_stiffness() const { return spatial_stiffness_; }

  /// Instrumentation: spatial matvecs performed so far (M_x and A_x).
  std::uint64_t spatial_matvec_count() const {
    return spatial_mass_.multiply_count() + spatial_stiffness_.multiply_count();
  }

private:
  void kron_temporal_tridiag(const TriDiagonalMatrix& t, const double* in, double* out) const;
  void kron_multiply_c(const double* in, double* out) const;
  void kron_multiply_ct(const double* in, double* out) const;
  void eigen_slice_apply(bool energy, const double* in, double* out) const;

  SimplicialMesh spatial_mesh_;
  TemporalMesh temporal_mesh_;
  double rho_;
  SpaceTimeLayout layout_;
  TriDiagonalMatrix temporal_mass_;
  TriDiagonalMatrix temporal_convection_;
  std::optional<DenseSymMatrix> hilbert_stiffness_;
  TemporalEigenbasis eigenbasis_;
  SparseSymMatrix spatial_mass_;
  SparseSymMatrix spatial_stiffness_;
};

/// Kronecker product of dense factors (test oracle building block).
DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace stoc
