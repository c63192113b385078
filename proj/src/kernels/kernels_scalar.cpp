#include <cmath>

#include "crowdtrack/kernels/kernels.hpp"

// Reference backend. Plain loops, no manual unrolling: this is the semantics
// the SIMD variants are tested against.

namespace crowdtrack::kernels {
namespace {

double sum_scalar(const double* x, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double min_scalar(const double* x, size_t n) {
  double m = x[0];
  for (size_t i = 1; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

void scale_scalar(double* x, size_t n, double a) {
  for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void squared_norms_scalar(const double* dx, const double* dy, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = dx[i] * dx[i] + dy[i] * dy[i];
}

void exp_neg_scaled_scalar(const double* d2, double shift, double inv2s2, double* w,
                           size_t n) {
  for (size_t i = 0; i < n; ++i) w[i] *= std::exp(-(d2[i] - shift) * inv2s2);
}

void weighted_sum2_scalar(const double* x, const double* y, const double* w, size_t n,
                          double* sx, double* sy) {
  double ax = 0.0, ay = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ax += w[i] * x[i];
    ay += w[i] * y[i];
  }
  *sx = ax;
  *sy = ay;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{sum_scalar,           min_scalar,
                                 scale_scalar,         squared_norms_scalar,
                                 exp_neg_scaled_scalar, weighted_sum2_scalar,
                                 "scalar"};
  return table;
}

}  // namespace crowdtrack::kernels
