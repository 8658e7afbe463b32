#pragma once

#include <cstddef>

namespace stoc {

/// Sine transforms at the half-integer frequencies (k + 1/2)π/T sampled on
/// the uniform temporal grid, backed by FFTW r2r plans (RODFT01/RODFT10).
///
/// With S[i,k] = sin(π (k+1/2) i / n), i = 1..n, k = 0..n-1:
///   analysis:  w = Sᵀ x
///   synthesis: x = S w
///
/// Plans are created once; executions use the new-array interface and are
/// safe to call concurrently on distinct buffers.
class SineTransform {
public:
  explicit SineTransform(std::size_t n);
  ~SineTransform();

  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;

  std::size_t size() const { return n_; }

  /// w[k] = sum_i x[i-1] sin(pi (k+1/2) i / n); scratch must hold n doubles.
  void analysis(const double* x, double* w, double* scratch) const;
  /// x[i-1] = sum_k w[k] sin(pi (k+1/2) i / n); scratch must hold n doubles.
  void synthesis(const double* w, double* x, double* scratch) const;

private:
  std::size_t n_;
  void* plan_dst3_;  // RODFT01
  void* plan_dst2_;  // RODFT10
};

}  // namespace stoc
