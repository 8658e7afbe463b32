#pragma once

#include <cstddef>
#include <cstdint>
#include <atomic>
#include <span>
#include <vector>

namespace stoc {

/// Dense row-major matrix (used for eigenvector bases and small oracles).
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double max_abs() const;
  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y = Aᵀ x
  void multiply_transposed(std::span<const double> x, std::span<double> y) const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense symmetric matrix, full storage. Rank-one accumulation keeps the
/// stored entries exactly symmetric (IEEE products commute).
class DenseSymMatrix {
public:
  DenseSymMatrix() = default;
  explicit DenseSymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }

  /// A += coeff * b bᵀ
  void add_scaled_outer(std::span<const double> b, double coeff);
  void multiply(std::span<const double> x, std::span<double> y) const;
  double max_abs() const;
  double max_asymmetry() const;
  double max_diagonal() const;

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Tridiagonal matrix with independent sub/super diagonals (the temporal
/// convection matrix is not symmetric).
struct TriDiagonalMatrix {
  TriDiagonalMatrix() = default;
  explicit TriDiagonalMatrix(std::size_t n) : diag(n, 0.0), sub(n > 0 ? n - 1 : 0, 0.0), super(n > 0 ? n - 1 : 0, 0.0) {}

  std::vector<double> diag;
  std::vector<double> sub;    // entry i couples row i+1 with column i
  std::vector<double> super;  // entry i couples row i with column i+1

  std::size_t size() const { return diag.size(); }
  bool is_symmetric(double tol = 0.0) const;
  void multiply(const double* x, double* y) const;
  DenseMatrix to_dense() const;
};

/// Returns false if the symmetric tridiagonal LDLᵀ factorization hits a
/// nonpositive pivot (matrix not positive definite).
bool tridiagonal_is_spd(const TriDiagonalMatrix& m);

/// Compressed sparse row symmetric matrix restricted to interior dofs.
/// Column indices are sorted within each row; assembly from triplets is
/// deterministic (stable sort). multiply() keeps an instrumentation count.
class SparseSymMatrix {
public:
  struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double value;
  };

  SparseSymMatrix() = default;
  static SparseSymMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);

  SparseSymMatrix(const SparseSymMatrix& other);
  SparseSymMatrix& operator=(const SparseSymMatrix& other);
  SparseSymMatrix(SparseSymMatrix&&) noexcept = default;
  SparseSymMatrix& operator=(SparseSymMatrix&&) noexcept = default;
  ~SparseSymMatrix() = default;

  std::size_t size() const { return n_; }
  std::size_t nnz() const { return values_.size(); }

  void multiply(const double* x, double* y) const;
  double diagonal(std::size_t i) const;
  double entry(std::size_t i, std::size_t j) const;
  bool structurally_symmetric() const;
  double max_asymmetry() const;
  DenseMatrix to_dense() const;

  std::uint64_t multiply_count() const { return multiply_count_.load(std::memory_order_relaxed); }
  void reset_multiply_count() const { multiply_count_.store(0, std::memory_order_relaxed); }

private:
  std::size_t n_ = 0;
  std::vector<std::uint32_t> row_offsets_;
  std::vector<std::uint32_t> col_indices_;
  std::vector<double> values_;
  mutable std::atomic<std::uint64_t> multiply_count_{0};
};

// Deterministic vector kernels: parallel loops use static schedules and
// reductions are combined in thread order, so results are bitwise
// reproducible at a fixed worker count.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);        // y += alpha x
void xpby(std::span<const double> x, double beta, std::span<double> y);         // y = x + beta y
void scale_copy(double alpha, std::span<const double> x, std::span<double> y);  // y = alpha x
void fill(std::span<double> x, double value);
void copy(std::span<const double> x, std::span<double> y);

/// Generalized symmetric-definite eigenproblem A v = λ M v. Eigenvalues
/// ascending, eigenvector columns M-orthonormal (CᵀMC = I).
/// Throws if M is not positive definite or the eigensolve fails.
void generalized_sym_eig(const DenseSymMatrix& a, const TriDiagonalMatrix& m,
                         std::vector<double>& eigenvalues, DenseMatrix& eigenvectors);

/// Dense SPD solve (small systems, test oracles). Throws if not SPD.
std::vector<double> solve_spd_dense(DenseMatrix a, std::vector<double> b);

int max_worker_threads();
void set_worker_threads(int n);

}  // namespace stoc
