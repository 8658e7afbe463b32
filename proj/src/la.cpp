#include "stoc/la.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <lapacke.h>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stoc {

namespace {
constexpr std::size_t kParallelCutoff = 4096;
}

int max_worker_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void DenseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    const double* row = data_.data() + i * cols_;
    for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

void DenseMatrix::multiply_transposed(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* row = data_.data() + i * cols_;
    const double xi = x[i];
    for (std::size_t j = 0; j < cols_; ++j) y[j] += row[j] * xi;
  }
}

void DenseSymMatrix::add_scaled_outer(std::span<const double> b, double coeff) {
  // entering an OpenMP region costs ~1us even when disabled by an `if`
  // clause; the series assembly calls this ~1e5 times on tiny matrices
  if (n_ < 64) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double bi = coeff * b[i];
      double* row = data_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) row[j] += bi * b[j];
    }
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < n_; ++i) {
    const double bi = coeff * b[i];
    double* row = data_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) row[j] += bi * b[j];
  }
}

void DenseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    const double* row = data_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

double DenseSymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double DenseSymMatrix::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
  return m;
}

double DenseSymMatrix::max_diagonal() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i) m = std::max(m, (*this)(i, i));
  return m;
}

bool TriDiagonalMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i + 1 < size(); ++i)
    if (std::abs(sub[i] - super[i]) > tol) return false;
  return true;
}

void TriDiagonalMatrix::multiply(const double* x, double* y) const {
  const std::size_t n = size();
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + super[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i) y[i] = sub[i - 1] * x[i - 1] + diag[i] * x[i] + super[i] * x[i + 1];
  y[n - 1] = sub[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1];
}

DenseMatrix TriDiagonalMatrix::to_dense() const {
  const std::size_t n = size();
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = diag[i];
    if (i + 1 < n) {
      a(i, i + 1) = super[i];
      a(i + 1, i) = sub[i];
    }
  }
  return a;
}

bool tridiagonal_is_spd(const TriDiagonalMatrix& m) {
  if (!m.is_symmetric(0.0)) return false;
  const std::size_t n = m.size();
  if (n == 0) return false;
  double d = m.diag[0];
  if (d <= 0.0) return false;
  for (std::size_t i = 1; i < n; ++i) {
    const double l = m.sub[i - 1] / d;
    d = m.diag[i] - l * m.sub[i - 1];
    if (d <= 0.0) return false;
  }
  return true;
}

SparseSymMatrix::SparseSymMatrix(const SparseSymMatrix& other)
    : n_(other.n_), row_offsets_(other.row_offsets_), col_indices_(other.col_indices_), values_(other.values_) {}

SparseSymMatrix& SparseSymMatrix::operator=(const SparseSymMatrix& other) {
  if (this != &other) {
    n_ = other.n_;
    row_offsets_ = other.row_offsets_;
    col_indices_ = other.col_indices_;
    values_ = other.values_;
    multiply_count_.store(0, std::memory_order_relaxed);
  }
  return *this;
}

SparseSymMatrix SparseSymMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  // stable sort keeps insertion order within equal (row, col) keys, so the
  // accumulation order (and thus the rounding) is deterministic
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseSymMatrix m;
  m.n_ = n;
  m.row_offsets_.assign(n + 1, 0);
  std::size_t k = 0;
  while (k < triplets.size()) {
    const std::uint32_t r = triplets[k].row;
    const std::uint32_t c = triplets[k].col;
    double v = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
      v += triplets[k].value;
      ++k;
    }
    m.col_indices_.push_back(c);
    m.values_.push_back(v);
    m.row_offsets_[r + 1] = static_cast<std::uint32_t>(m.col_indices_.size());
  }
  for (std::size_t r = 0; r < n; ++r) m.row_offsets_[r + 1] = std::max(m.row_offsets_[r + 1], m.row_offsets_[r]);
  return m;
}

void SparseSymMatrix::multiply(const double* x, double* y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[col_indices_[k]];
    y[i] = s;
  }
  multiply_count_.fetch_add(1, std::memory_order_relaxed);
}

double SparseSymMatrix::diagonal(std::size_t i) const { return entry(i, i); }

double SparseSymMatrix::entry(std::size_t i, std::size_t j) const {
  for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
    if (col_indices_[k] == j) return values_[k];
  return 0.0;
}

bool SparseSymMatrix::structurally_symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t j = col_indices_[k];
      bool found = false;
      for (std::uint32_t l = row_offsets_[j]; l < row_offsets_[j + 1]; ++l)
        if (col_indices_[l] == i) {
          found = true;
          break;
        }
      if (!found) return false;
    }
  return true;
}

double SparseSymMatrix::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      m = std::max(m, std::abs(values_[k] - entry(col_indices_[k], i)));
  return m;
}

DenseMatrix SparseSymMatrix::to_dense() const {
  DenseMatrix a(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::uint32_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) a(i, col_indices_[k]) = values_[k];
  return a;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
#ifdef _OPENMP
  if (n >= kParallelCutoff && omp_get_max_threads() > 1) {
    std::vector<double> partial(static_cast<std::size_t>(omp_get_max_threads()), 0.0);
#pragma omp parallel
    {
      double s = 0.0;
#pragma omp for schedule(static) nowait
      for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
      partial[static_cast<std::size_t>(omp_get_thread_num())] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
  }
#endif
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  if (n < kParallelCutoff) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for simd schedule(static)
#endif
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  const std::size_t n = x.size();
  if (n < kParallelCutoff) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for simd schedule(static)
#endif
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void scale_copy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  if (n < kParallelCutoff) {
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for simd schedule(static)
#endif
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void fill(std::span<double> x, double value) { std::fill(x.begin(), x.end(), value); }

void copy(std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); }

void generalized_sym_eig(const DenseSymMatrix& a, const TriDiagonalMatrix& m,
                         std::vector<double>& eigenvalues, DenseMatrix& eigenvectors) {
  const std::size_t n = a.size();
  if (m.size() != n) throw std::invalid_argument("generalized_sym_eig: dimension mismatch");
  if (n == 0) throw std::invalid_argument("generalized_sym_eig: empty matrix");

  DenseMatrix awork(n, n);
  std::memcpy(awork.data(), a.data(), n * n * sizeof(double));
  DenseMatrix bwork = m.to_dense();
  eigenvalues.assign(n, 0.0);

  const lapack_int info = LAPACKE_dsygv(LAPACK_ROW_MAJOR, 1, 'V', 'L', static_cast<lapack_int>(n), awork.data(),
                                        static_cast<lapack_int>(n), bwork.data(), static_cast<lapack_int>(n),
                                        eigenvalues.data());
  if (info > static_cast<lapack_int>(n))
    throw std::runtime_error("generalized_sym_eig: mass matrix factorization broke down (not positive definite)");
  if (info != 0) throw std::runtime_error("generalized_sym_eig: eigensolver failed to converge");
  // dsygv returns eigenvectors normalized to ZᵀBZ = I, ascending eigenvalues
  eigenvectors = std::move(awork);
}

std::vector<double> solve_spd_dense(DenseMatrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_spd_dense: dimension mismatch");
  const lapack_int info = LAPACKE_dposv(LAPACK_ROW_MAJOR, 'L', static_cast<lapack_int>(n), 1, a.data(),
                                        static_cast<lapack_int>(n), b.data(), 1);
  if (info != 0) throw std::runtime_error("solve_spd_dense: matrix not positive definite");
  return b;
}

}  // namespace stoc
