#include "stoc/dst.hpp"

#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace stoc {

SineTransform::SineTransform(std::size_t n) : n_(n), plan_dst3_(nullptr), plan_dst2_(nullptr) {
  if (n == 0) throw std::invalid_argument("SineTransform: size must be positive");
  // FFTW planner is not thread safe; transforms are set up serially during
  // operator construction. FFTW_UNALIGNED keeps new-array execution valid
  // for arbitrary caller buffers.
  std::vector<double> in(n), out(n);
  plan_dst3_ = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_RODFT01,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_dst2_ = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_RODFT10,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan_dst3_ == nullptr || plan_dst2_ == nullptr) throw std::runtime_error("SineTransform: fftw planning failed");
}

SineTransform::~SineTransform() {
  if (plan_dst3_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_dst3_));
  if (plan_dst2_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_dst2_));
}

void SineTransform::analysis(const double* x, double* w, double* scratch) const {
  // RODFT01 with the last input doubled gives Y_k = 2 sum_{i=1..n} x_i sin(pi i (k+1/2)/n):
  // the transform itself sums i = 1..n-1 and contributes (-1)^k X_{n-1},
  // while sin(pi n (k+1/2)/n) = (-1)^k covers the i = n term.
  for (std::size_t j = 0; j + 1 < n_; ++j) scratch[j] = x[j];
  scratch[n_ - 1] = 2.0 * x[n_ - 1];
  fftw_execute_r2r(static_cast<fftw_plan>(plan_dst3_), scratch, w);
  for (std::size_t k = 0; k < n_; ++k) w[k] *= 0.5;
}

void SineTransform::synthesis(const double* w, double* x, double* scratch) const {
  // RODFT10: Y_k = 2 sum_j X_j sin(pi (j+1/2)(k+1)/n) = 2 x_{k+1}
  for (std::size_t j = 0; j < n_; ++j) scratch[j] = w[j];
  fftw_execute_r2r(static_cast<fftw_plan>(plan_dst2_), scratch, x);
  for (std::size_t i = 0; i < n_; ++i) x[i] *= 0.5;
}

}  // namespace stoc
