#include "stoc/spacetime.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stoc {

namespace {
// below this many scalar operations a parallel region costs more than it buys
constexpr std::size_t kParallelWork = 16384;

// reusable per-thread apply workspace: allocating (and zeroing) multi-MB
// vectors on every application costs more than the arithmetic at scale
struct ApplyWorkspace {
  std::vector<double> a;
  std::vector<double> b;
};

ApplyWorkspace& apply_workspace(std::size_t n) {
  thread_local ApplyWorkspace ws;
  if (ws.a.size() < n) {
    ws.a.resize(n);
    ws.b.resize(n);
  }
  return ws;
}
}  // namespace

SystemOperator::SystemOperator(SimplicialMesh spatial_mesh, TemporalMesh temporal_mesh, double rho,
                               SystemOperatorOptions options)
    : spatial_mesh_(std::move(spatial_mesh)),
      temporal_mesh_(temporal_mesh),
      rho_(rho),
      temporal_mass_(assemble_temporal_mass(temporal_mesh)),
      temporal_convection_(assemble_temporal_convection(temporal_mesh)),
      spatial_mass_(assemble_spatial_mass(spatial_mesh_)),
      spatial_stiffness_(assemble_spatial_stiffness(spatial_mesh_)) {
  if (rho < 0.0) throw std::invalid_argument("SystemOperator: rho must be nonnegative");
  layout_ = {temporal_mesh_.n_dofs, spatial_mass_.size()};

  const std::size_t n_t = temporal_mesh_.n_dofs;
  if (n_t <= options.dense_setup_limit) {
    hilbert_stiffness_ = assemble_hilbert_stiffness(temporal_mesh_, options.series_tol, options.series_max_terms);
    std::optional<TemporalEigenbasis> fast;
    if (!options.force_dense_eigenbasis)
      fast = try_fast_eigenbasis(temporal_mesh_, *hilbert_stiffness_, temporal_mass_, options.fast_validate_tol);
    eigenbasis_ = fast ? std::move(*fast) : solve_generalized_evp(*hilbert_stiffness_, temporal_mass_);
  } else {
    if (options.force_dense_eigenbasis)
      throw std::invalid_argument("SystemOperator: dense eigenbasis requested beyond dense_setup_limit");
    eigenbasis_ = make_fast_eigenbasis_analytic(temporal_mesh_);
  }
}

void SystemOperator::kron_temporal_tridiag(const TriDiagonalMatrix& t, const double* in, double* out) const {
  // (T ⊗ I_x): whole-slice combinations, slices are contiguous
  const std::size_t n_t = layout_.n_t;
  const std::size_t m = layout_.m_x;
  if (n_t == 1) {
    for (std::size_t i = 0; i < m; ++i) out[i] = t.diag[0] * in[i];
    return;
  }
  auto combine_slice = [&](std::size_t k) {
    double* dst = out + k * m;
    const double* mid = in + k * m;
    const double dk = t.diag[k];
    if (k == 0) {
      const double sk = t.super[0];
      const double* up = in + m;
      for (std::size_t i = 0; i < m; ++i) dst[i] = dk * mid[i] + sk * up[i];
    } else if (k + 1 == n_t) {
      const double bk = t.sub[k - 1];
      const double* dn = in + (k - 1) * m;
      for (std::size_t i = 0; i < m; ++i) dst[i] = bk * dn[i] + dk * mid[i];
    } else {
      const double bk = t.sub[k - 1];
      const double sk = t.super[k];
      const double* dn = in + (k - 1) * m;
      const double* up = in + (k + 1) * m;
      for (std::size_t i = 0; i < m; ++i) dst[i] = bk * dn[i] + dk * mid[i] + sk * up[i];
    }
  };
  if (n_t * m < kParallelWork) {
    for (std::size_t k = 0; k < n_t; ++k) combine_slice(k);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t k = 0; k < n_t; ++k) combine_slice(k);
}

void SystemOperator::kron_multiply_ct(const double* in, double* out) const {
  const std::size_t n_t = layout_.n_t;
  const std::size_t m = layout_.m_x;
  if (eigenbasis_.mode() == EigenbasisMode::dense) {
    const DenseMatrix& c = eigenbasis_.dense_vectors();
    auto fill_slice = [&](std::size_t j) {
      double* dst = out + j * m;
      for (std::size_t i = 0; i < m; ++i) dst[i] = 0.0;
      for (std::size_t l = 0; l < n_t; ++l) {
        const double clj = c(l, j);
        const double* src = in + l * m;
        for (std::size_t i = 0; i < m; ++i) dst[i] += clj * src[i];
      }
    };
    if (n_t * n_t * m < kParallelWork) {
      for (std::size_t j = 0; j < n_t; ++j) fill_slice(j);
      return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t j = 0; j < n_t; ++j) fill_slice(j);
    return;
  }
  const bool parallel = m > 1 && n_t * m >= kParallelWork;
#ifdef _OPENMP
#pragma omp parallel if (parallel)
#endif
  {
    std::vector<double> column(n_t), transformed(n_t), scratch(2 * n_t);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n_t; ++k) column[k] = in[k * m + i];
      eigenbasis_.multiply_ct(column.data(), transformed.data(), scratch.data());
      for (std::size_t k = 0; k < n_t; ++k) out[k * m + i] = transformed[k];
    }
  }
}

void SystemOperator::kron_multiply_c(const double* in, double* out) const {
  const std::size_t n_t = layout_.n_t;
  const std::size_t m = layout_.m_x;
  if (eigenbasis_.mode() == EigenbasisMode::dense) {
    const DenseMatrix& c = eigenbasis_.dense_vectors();
    auto fill_slice = [&](std::size_t k) {
      double* dst = out + k * m;
      for (std::size_t i = 0; i < m; ++i) dst[i] = 0.0;
      for (std::size_t j = 0; j < n_t; ++j) {
        const double ckj = c(k, j);
        const double* src = in + j * m;
        for (std::size_t i = 0; i < m; ++i) dst[i] += ckj * src[i];
      }
    };
    if (n_t * n_t * m < kParallelWork) {
      for (std::size_t k = 0; k < n_t; ++k) fill_slice(k);
      return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t k = 0; k < n_t; ++k) fill_slice(k);
    return;
  }
  const bool parallel = m > 1 && n_t * m >= kParallelWork;
#ifdef _OPENMP
#pragma omp parallel if (parallel)
#endif
  {
    std::vector<double> column(n_t), transformed(n_t), scratch(2 * n_t);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < n_t; ++k) column[k] = in[k * m + i];
      eigenbasis_.multiply_c(column.data(), transformed.data(), scratch.data());
      for (std::size_t k = 0; k < n_t; ++k) out[k * m + i] = transformed[k];
    }
  }
}

void SystemOperator::eigen_slice_apply(bool energy, const double* in, double* out) const {
  const std::size_t n_t = layout_.n_t;
  const std::size_t m = layout_.m_x;
  const std::vector<double>& lambda = eigenbasis_.eigenvalues();
  auto apply_slice = [&](std::size_t j, std::vector<double>& tmp) {
    const double* src = in + j * m;
    double* dst = out + j * m;
    // K̂ slice: (1 + ϱλ_j) M_x + ϱ A_x;  D̂ slice: λ_j M_x + A_x
    const double mass_coeff = energy ? lambda[j] : 1.0 + rho_ * lambda[j];
    const double stiff_coeff = energy ? 1.0 : rho_;
    spatial_mass_.multiply(src, dst);
    spatial_stiffness_.multiply(src, tmp.data());
    for (std::size_t i = 0; i < m; ++i) dst[i] = mass_coeff * dst[i] + stiff_coeff * tmp[i];
  };
  if (n_t * m < kParallelWork) {
    std::vector<double> tmp(m);
    for (std::size_t j = 0; j < n_t; ++j) apply_slice(j, tmp);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::vector<double> tmp(m);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::size_t j = 0; j < n_t; ++j) apply_slice(j, tmp);
  }
}

void SystemOperator::apply(std::span<const double> v, std::span<double> w) const {
  const std::size_t n = layout_.size();
  if (v.size() != n || w.size() != n) throw std::invalid_argument("SystemOperator::apply: dimension mismatch");
  ApplyWorkspace& ws = apply_workspace(n);
  kron_temporal_tridiag(temporal_mass_, v.data(), ws.a.data());
  kron_multiply_ct(ws.a.data(), ws.b.data());
  eigen_slice_apply(false, ws.b.data(), ws.a.data());
  kron_multiply_c(ws.a.data(), ws.b.data());
  kron_temporal_tridiag(temporal_mass_, ws.b.data(), w.data());
}

void SystemOperator::apply_energy(std::span<const double> v, std::span<double> w) const {
  const std::size_t n = layout_.size();
  if (v.size() != n || w.size() != n) throw std::invalid_argument("SystemOperator::apply_energy: dimension mismatch");
  ApplyWorkspace& ws = apply_workspace(n);
  kron_temporal_tridiag(temporal_mass_, v.data(), ws.a.data());
  kron_multiply_ct(ws.a.data(), ws.b.data());
  eigen_slice_apply(true, ws.b.data(), ws.a.data());
  kron_multiply_c(ws.a.data(), ws.b.data());
  kron_temporal_tridiag(temporal_mass_, ws.b.data(), w.data());
}

double SystemOperator::anisotropic_norm_sq(std::span<const double> v) const {
  std::vector<double> w(v.size());
  apply_energy(v, w);
  return dot(v, w);
}

void SystemOperator::recover_control(std::span<const double> u, std::span<double> z) const {
  const std::size_t n = layout_.size();
  if (u.size() != n || z.size() != n) throw std::invalid_argument("SystemOperator::recover_control: dimension mismatch");
  const std::size_t n_t = layout_.n_t;
  const std::size_t m = layout_.m_x;
  std::vector<double> buf(n), buf2(n);
  const bool parallel = n >= kParallelWork;

  // (G_t ⊗ M_x) u
  kron_temporal_tridiag(temporal_convection_, u.data(), buf.data());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::size_t k = 0; k < n_t; ++k) spatial_mass_.multiply(buf.data() + k * m, z.data() + k * m);

  // + (M_t ⊗ A_x) u
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::size_t k = 0; k < n_t; ++k) spatial_stiffness_.multiply(u.data() + k * m, buf.data() + k * m);
  kron_temporal_tridiag(temporal_mass_, buf.data(), buf2.data());
  axpy(1.0, buf2, z);
}

std::vector<double> SystemOperator::assemble_load(const TargetFunction& target, int temporal_order,
                                                  int spatial_order) const {
  const std::size_t n_t = layout_.n_t;
  const std::size_t m = layout_.m_x;
  const int d = spatial_mesh_.dim();
  const double h_t = temporal_mesh_.dt();

  const SimplexQuadrature xrule = simplex_quadrature(d, spatial_order);
  // temporal Gauss rule of the requested polynomial exactness
  const SimplexQuadrature trule = simplex_quadrature(1, temporal_order);

  // physical spatial quadrature: barycentric points, weight · |K| · d!
  double dfact = 1.0;
  for (int a = 2; a <= d; ++a) dfact *= a;

  std::vector<double> f(n_t * m, 0.0);

  // two passes over even/odd temporal elements: element l touches only the
  // dof slices l-1 and l, so same-parity elements write disjointly
  for (std::size_t parity = 0; parity < 2; ++parity) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (n_t * m >= kParallelWork)
#endif
    for (std::size_t l = 1 + parity; l <= n_t; l += 2) {
      const double t0 = temporal_mesh_.node(l - 1);
      for (std::size_t tq = 0; tq < trule.points.size(); ++tq) {
        const double tau = trule.points[tq][1];  // on (0,1)
        const double t = t0 + tau * h_t;
        const double wt = trule.weights[tq] * h_t;
        const double phi_left = 1.0 - tau;  // dof l-1 (absent for l = 1)
        const double phi_right = tau;       // dof l
        for (std::size_t s = 0; s < spatial_mesh_.num_simplices(); ++s) {
          const auto verts = spatial_mesh_.simplex(s);
          const double scale = spatial_mesh_.simplex_volume(s) * dfact;
          for (std::size_t q = 0; q < xrule.points.size(); ++q) {
            std::array<double, 3> x = {0.0, 0.0, 0.0};
            for (int vtx = 0; vtx <= d; ++vtx) {
              const auto& vc = spatial_mesh_.vertex(static_cast<std::size_t>(verts[static_cast<std::size_t>(vtx)]));
              for (int a = 0; a < d; ++a)
                x[static_cast<std::size_t>(a)] += xrule.points[q][static_cast<std::size_t>(vtx)] * vc[static_cast<std::size_t>(a)];
            }
            const double common = wt * xrule.weights[q] * scale * target(x, t);
            if (common == 0.0) continue;
            for (int vtx = 0; vtx <= d; ++vtx) {
              const std::int64_t dof = spatial_mesh_.dof_of_vertex(static_cast<std::size_t>(verts[static_cast<std::size_t>(vtx)]));
              if (dof < 0) continue;
              const double psi = xrule.points[q][static_cast<std::size_t>(vtx)];
              if (l >= 2) f[(l - 2) * m + static_cast<std::size_t>(dof)] += common * psi * phi_left;
              f[(l - 1) * m + static_cast<std::size_t>(dof)] += common * psi * phi_right;
            }
          }
        }
      }
    }
  }
  return f;
}

DenseMatrix kronecker(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double aij = a(i, j);
      if (aij == 0.0) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l) out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

DenseMatrix SystemOperator::assemble_dense(OperatorKind which) const {
  const std::size_t n = layout_.size();
  if (n > 4096) throw std::invalid_argument("assemble_dense: size guard exceeded (N_t·M_x must be <= 4096)");
  if (!hilbert_stiffness_ && which != OperatorKind::control)
    throw std::runtime_error("assemble_dense: dense temporal stiffness unavailable beyond dense_setup_limit");

  const DenseMatrix mx = spatial_mass_.to_dense();
  const DenseMatrix ax = spatial_stiffness_.to_dense();
  const DenseMatrix mt = temporal_mass_.to_dense();

  auto hilbert_dense = [&] {
    const std::size_t nt = temporal_mesh_.n_dofs;
    DenseMatrix at(nt, nt);
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < nt; ++j) at(i, j) = (*hilbert_stiffness_)(i, j);
    return at;
  };

  DenseMatrix out(n, n);
  switch (which) {
    case OperatorKind::system: {
      const DenseMatrix at = hilbert_dense();
      const DenseMatrix mm = kronecker(mt, mx);
      const DenseMatrix am = kronecker(at, mx);
      const DenseMatrix ma = kronecker(mt, ax);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = mm(i, j) + rho_ * (am(i, j) + ma(i, j));
      return out;
    }
    case OperatorKind::energy: {
      const DenseMatrix at = hilbert_dense();
      const DenseMatrix am = kronecker(at, mx);
      const DenseMatrix ma = kronecker(mt, ax);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = am(i, j) + ma(i, j);
      return out;
    }
    case OperatorKind::control: {
      const DenseMatrix gm = kronecker(temporal_convection_.to_dense(), mx);
      const DenseMatrix ma = kronecker(mt, ax);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = gm(i, j) + ma(i, j);
      return out;
    }
  }
  throw std::logic_error("assemble_dense: unknown operator kind");
}

}  // namespace stoc
