#include "stoc/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stoc {

namespace {
constexpr double kPi = std::numbers::pi;

double frequency(const TemporalMesh& mesh, std::size_t k) {
  return (0.5 + static_cast<double>(k)) * kPi / mesh.horizon;
}

double sign_of_mode(std::size_t k) { return (k % 2 == 0) ? 1.0 : -1.0; }
}  // namespace

TemporalMesh::TemporalMesh(double horizon_, std::size_t n_dofs_) : horizon(horizon_), n_dofs(n_dofs_) {
  if (!(horizon > 0.0)) throw std::invalid_argument("TemporalMesh: horizon must be positive");
  if (n_dofs < 1) throw std::invalid_argument("TemporalMesh: need at least one temporal dof");
}

TriDiagonalMatrix assemble_temporal_mass(const TemporalMesh& mesh) {
  const std::size_t n = mesh.n_dofs;
  const double h = mesh.dt();
  TriDiagonalMatrix m(n);
  for (std::size_t j = 0; j < n; ++j) m.diag[j] = 2.0 * h / 3.0;
  m.diag[n - 1] = h / 3.0;  // half hat at t = T
  for (std::size_t j = 0; j + 1 < n; ++j) {
    m.sub[j] = h / 6.0;
    m.super[j] = h / 6.0;
  }
  return m;
}

TriDiagonalMatrix assemble_temporal_convection(const TemporalMesh& mesh) {
  // G[l,k] = ∫ φ_k' φ_l dt: diagonal ½φ_l(T)², neighbors ±1/2.
  const std::size_t n = mesh.n_dofs;
  TriDiagonalMatrix g(n);
  g.diag[n - 1] = 0.5;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    g.super[j] = 0.5;
    g.sub[j] = -0.5;
  }
  return g;
}

double hat_sine_moment(const TemporalMesh& mesh, std::size_t k, std::size_t i) {
  const std::size_t n = mesh.n_dofs;
  if (i < 1 || i > n) throw std::invalid_argument("hat_sine_moment: dof index out of range");
  const double h = mesh.dt();
  const double lam = frequency(mesh, k);
  if (i < n) return (2.0 - 2.0 * std::cos(lam * h)) * std::sin(lam * mesh.node(i)) / (lam * lam * h);
  // half hat at t = T; uses cos(λ_k T) = 0 and sin(λ_k T) = (-1)^k
  return (sign_of_mode(k) - std::sin(lam * mesh.node(n - 1))) / (lam * lam * h);
}

DenseSymMatrix assemble_hilbert_stiffness_direct(const TemporalMesh& mesh, double series_tol,
                                                 std::size_t max_terms) {
  if (!(series_tol > 0.0)) throw std::invalid_argument("assemble_hilbert_stiffness: series_tol must be positive");
  const std::size_t n = mesh.n_dofs;
  const double h = mesh.dt();
  DenseSymMatrix a(n);
  std::vector<double> b(n);
  const double two_over_t = 2.0 / mesh.horizon;

  // λ_k t_i = π (2k+1) i / (2N): reduce the phase in integer arithmetic and
  // look the sine up over one period; large-argument std::sin would dominate
  // the whole assembly otherwise and is less accurate on top.
  const std::size_t period = 4 * n;
  std::vector<double> sin_table(period);
  for (std::size_t r = 0; r < period; ++r)
    sin_table[r] = std::sin(kPi * static_cast<double>(r) / (2.0 * static_cast<double>(n)));

  for (std::size_t k = 0;; ++k) {
    if (k >= max_terms)
      throw std::runtime_error("assemble_hilbert_stiffness: term cap reached before tolerance");
    const double lam = frequency(mesh, k);
    const std::size_t odd = (2 * k + 1) % period;
    const double cos_lam_h = sin_table[(odd + n) % period];  // cos x = sin(x + pi/2)
    const double interior_factor = (2.0 - 2.0 * cos_lam_h) / (lam * lam * h);
    double bmax = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      b[i] = interior_factor * sin_table[(odd * (i + 1)) % period];
      bmax = std::max(bmax, std::abs(b[i]));
    }
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    b[n - 1] = (sign - sin_table[(odd * (n - 1)) % period]) / (lam * lam * h);
    bmax = std::max(bmax, std::abs(b[n - 1]));
    const double coeff = two_over_t * lam;
    a.add_scaled_outer(b, coeff);

    // A is a sum of PSD rank-one terms, so its max entry sits on the diagonal.
    const double norm_a = a.max_diagonal();
    const double increment_rel = coeff * bmax * bmax / norm_a;
    // Realized increments oscillate by orders of magnitude across the alias
    // classes of the sampled sines, so the tail test uses the monotone
    // envelope term = (2/T)λ(4/(λ²h))² summed over k' > k analytically.
    const double tail_rel =
        16.0 * mesh.horizon / (lam * lam * lam * h * h) * (static_cast<double>(k) + 0.5) / norm_a;
    if (k + 1 >= 4 * n && increment_rel < series_tol && tail_rel < series_tol) break;
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);
  return a;
}

std::vector<double> hilbert_alias_weights(const TemporalMesh& mesh) {
  const std::size_t n = mesh.n_dofs;
  const double nn = static_cast<double>(n);
  const double h = mesh.dt();
  const double t = mesh.horizon;
  std::vector<double> gamma(n);

  // class j collects k = j + 2mN and k = 2N-1-j + 2mN; all class members share
  // sin²(λ_k h / 2) = sin²(π (j+1/2) / (2N)), so
  //   γ_j = 32 σ_j² T² / (π³ h²) · Σ_class (k+1/2)^-3.
  auto tail_sum = [nn](double a) {
    // Σ_{m>=0} (a + 2Nm)^-3 with Euler-Maclaurin midpoint tail
    double s = 0.0;
    const std::size_t m_cap = 1500;
    std::size_t m = 0;
    for (; m < m_cap; ++m) {
      const double base = a + 2.0 * nn * static_cast<double>(m);
      const double term = 1.0 / (base * base * base);
      s += term;
      if (term < 1e-17 * s) {
        ++m;
        break;
      }
    }
    const double edge = a + 2.0 * nn * (static_cast<double>(m) - 0.5);
    s += 1.0 / (4.0 * nn * edge * edge);                       // ∫_{m-1/2}^∞ (a+2Nx)^-3 dx
    s -= (nn / 4.0) / (edge * edge * edge * edge);             // +(1/24) f'(m-1/2)
    return s;
  };

  for (std::size_t j = 0; j < n; ++j) {
    const double sigma = std::sin(kPi * (static_cast<double>(j) + 0.5) / (2.0 * nn));
    const double sigma2 = sigma * sigma;
    const double class_sum = tail_sum(static_cast<double>(j) + 0.5) + tail_sum(2.0 * nn - 0.5 - static_cast<double>(j));
    gamma[j] = 32.0 * sigma2 * sigma2 * t * t / (kPi * kPi * kPi * h * h) * class_sum;
  }
  return gamma;
}

namespace {

DenseSymMatrix assemble_hilbert_stiffness_folded(const TemporalMesh& mesh) {
  const std::size_t n = mesh.n_dofs;
  const std::vector<double> gamma = hilbert_alias_weights(mesh);
  const SineTransform dst(n);
  DenseSymMatrix a(n);

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::vector<double> unit(n), w(n), col(n), scratch(n);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(unit.begin(), unit.end(), 0.0);
      unit[i] = (i + 1 == n) ? 0.5 : 1.0;  // E e_i
      dst.analysis(unit.data(), w.data(), scratch.data());
      for (std::size_t k = 0; k < n; ++k) w[k] *= gamma[k];
      dst.synthesis(w.data(), col.data(), scratch.data());
      for (std::size_t l = 0; l < n; ++l) a(l, i) = (l + 1 == n) ? 0.5 * col[l] : col[l];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);
  return a;
}

}  // namespace

DenseSymMatrix assemble_hilbert_stiffness(const TemporalMesh& mesh, double series_tol, std::size_t max_terms,
                                          std::size_t direct_size_limit) {
  if (!(series_tol > 0.0)) throw std::invalid_argument("assemble_hilbert_stiffness: series_tol must be positive");
  if (mesh.n_dofs <= direct_size_limit) return assemble_hilbert_stiffness_direct(mesh, series_tol, max_terms);
  return assemble_hilbert_stiffness_folded(mesh);
}

TemporalEigenbasis TemporalEigenbasis::make_dense(std::vector<double> eigenvalues, DenseMatrix vectors,
                                                  TriDiagonalMatrix mass) {
  TemporalEigenbasis basis;
  basis.mode_ = EigenbasisMode::dense;
  basis.eigenvalues_ = std::move(eigenvalues);
  basis.vectors_ = std::move(vectors);
  basis.mass_ = std::move(mass);
  return basis;
}

TemporalEigenbasis TemporalEigenbasis::make_fast(std::vector<double> eigenvalues, std::vector<double> mode_scale,
                                                 TriDiagonalMatrix mass) {
  TemporalEigenbasis basis;
  basis.mode_ = EigenbasisMode::fast_sine;
  basis.eigenvalues_ = std::move(eigenvalues);
  basis.mode_scale_ = std::move(mode_scale);
  basis.mass_ = std::move(mass);
  basis.dst_ = std::make_shared<SineTransform>(basis.eigenvalues_.size());
  return basis;
}

void TemporalEigenbasis::multiply_c(const double* in, double* out, double* scratch) const {
  const std::size_t n = size();
  if (mode_ == EigenbasisMode::dense) {
    vectors_.multiply({in, n}, {out, n});
    return;
  }
  for (std::size_t k = 0; k < n; ++k) scratch[k] = mode_scale_[k] * in[k];
  dst_->synthesis(scratch, out, scratch + n);
}

void TemporalEigenbasis::multiply_ct(const double* in, double* out, double* scratch) const {
  const std::size_t n = size();
  if (mode_ == EigenbasisMode::dense) {
    vectors_.multiply_transposed({in, n}, {out, n});
    return;
  }
  dst_->analysis(in, out, scratch);
  for (std::size_t k = 0; k < n; ++k) out[k] *= mode_scale_[k];
}

void TemporalEigenbasis::analysis(const double* v, double* vhat, double* scratch) const {
  const std::size_t n = size();
  mass_.multiply(v, scratch);
  multiply_ct(scratch, vhat, scratch + n);
}

void TemporalEigenbasis::synthesis(const double* vhat, double* v, double* scratch) const {
  multiply_c(vhat, v, scratch);
}

DenseMatrix TemporalEigenbasis::materialize_vectors() const {
  const std::size_t n = size();
  if (mode_ == EigenbasisMode::dense) return vectors_;
  DenseMatrix c(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      c(i, j) = mode_scale_[j] * std::sin(kPi * (static_cast<double>(j) + 0.5) * static_cast<double>(i + 1) /
                                          static_cast<double>(n));
  return c;
}

TemporalEigenbasis solve_generalized_evp(const DenseSymMatrix& a, const TriDiagonalMatrix& m) {
  std::vector<double> eigenvalues;
  DenseMatrix vectors;
  generalized_sym_eig(a, m, eigenvalues, vectors);
  return TemporalEigenbasis::make_dense(std::move(eigenvalues), std::move(vectors), m);
}

std::optional<TemporalEigenbasis> try_fast_eigenbasis(const TemporalMesh& mesh, const DenseSymMatrix& a,
                                                      const TriDiagonalMatrix& m, double validate_tol) {
  const std::size_t n = mesh.n_dofs;
  if (a.size() != n || m.size() != n) throw std::invalid_argument("try_fast_eigenbasis: dimension mismatch");

  std::vector<double> eigenvalues(n), scale(n);
  std::vector<double> s(n), ms(n), as(n);
  double lambda_max = 0.0;
  double residual_max = 0.0;

  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i)
      s[i] = std::sin(kPi * (static_cast<double>(j) + 0.5) * static_cast<double>(i + 1) / static_cast<double>(n));
    m.multiply(s.data(), ms.data());
    const double norm_sq = dot(s, ms);
    if (!(norm_sq > 0.0)) return std::nullopt;
    a.multiply(s, as);
    const double rayleigh = dot(s, as) / norm_sq;
    eigenvalues[j] = rayleigh;
    scale[j] = 1.0 / std::sqrt(norm_sq);
    for (std::size_t i = 0; i < n; ++i)
      residual_max = std::max(residual_max, std::abs(scale[j] * (as[i] - rayleigh * ms[i])));
    lambda_max = std::max(lambda_max, rayleigh);
    if (j > 0 && eigenvalues[j] <= eigenvalues[j - 1]) return std::nullopt;  // must already be ascending
  }
  if (residual_max > validate_tol * lambda_max) return std::nullopt;
  return TemporalEigenbasis::make_fast(std::move(eigenvalues), std::move(scale), m);
}

TemporalEigenbasis make_fast_eigenbasis_analytic(const TemporalMesh& mesh) {
  const std::size_t n = mesh.n_dofs;
  const double nn = static_cast<double>(n);
  const double h = mesh.dt();
  const std::vector<double> gamma = hilbert_alias_weights(mesh);

  std::vector<double> eigenvalues(n), scale(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double theta = kPi * (static_cast<double>(j) + 0.5) / nn;
    const double mass_eig = h / 3.0 * (2.0 + std::cos(theta));  // M s_j = m_j E s_j
    eigenvalues[j] = 0.5 * nn * gamma[j] / mass_eig;
    scale[j] = 1.0 / std::sqrt(mass_eig * nn * 0.5);            // s_jᵀ M s_j = m_j N/2
    if (!(eigenvalues[j] > 0.0) || (j > 0 && eigenvalues[j] <= eigenvalues[j - 1]))
      throw std::runtime_error("make_fast_eigenbasis_analytic: eigenvalue ordering violated");
  }
  return TemporalEigenbasis::make_fast(std::move(eigenvalues), std::move(scale), assemble_temporal_mass(mesh));
}

}  // namespace stoc
