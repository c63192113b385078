#pragma once

#include <cstddef>

namespace crowdtrack::kernels {

// Data-parallel inner loops behind a runtime-dispatched table. The scalar
// backend is the reference semantics; the AVX2 backend must agree with it to
// tight floating-point tolerance (reassociation differences only) and is
// selected automatically when the CPU supports AVX2+FMA. The environment
// variable CROWDTRACK_KERNELS (scalar|avx2|auto) overrides the default.
struct KernelTable {
  double (*sum)(const double* x, size_t n);
  double (*min_value)(const double* x, size_t n);
  void (*scale)(double* x, size_t n, double a);
  // out[i] = dx[i]^2 + dy[i]^2
  void (*squared_norms)(const double* dx, const double* dy, double* out, size_t n);
  // w[i] *= exp(-(d2[i] - shift) * inv2s2)
  void (*exp_neg_scaled)(const double* d2, double shift, double inv2s2, double* w,
                         size_t n);
  // *sx = sum w[i]*x[i], *sy = sum w[i]*y[i]
  void (*weighted_sum2)(const double* x, const double* y, const double* w, size_t n,
                        double* sx, double* sy);
  const char* name;
};

enum class Backend { Scalar, Avx2 };

bool avx2_supported();
Backend active_backend();
// Throws std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend b);

const KernelTable& active();

// Direct access to the reference table (tests, forced-scalar comparisons).
const KernelTable& scalar_table();
// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table();

}  // namespace crowdtrack::kernels
