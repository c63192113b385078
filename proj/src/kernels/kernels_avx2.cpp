#include "crowdtrack/kernels/kernels.hpp"

// ---------------------------------------------------------------------------
// AVX2 + FMA backend. Compiled in its own translation unit with -mavx2 -mfma;
// when the toolchain lacks those flags the table degrades to null and the
// dispatcher keeps the scalar reference.
// ---------------------------------------------------------------------------

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace crowdtrack::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp(x) via the classic rational approximation over the reduced range
// [-ln2/2, ln2/2], |rel err| within a few ulp of libm. Arguments below -708
// flush to exactly 0 (the scalar path underflows the same way).
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d lo_cut = _mm256_set1_pd(-708.0);

  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_cut), _mm256_set1_pd(709.0));
  __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, xc);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);
  __m256d r2 = _mm256_mul_pd(r, r);

  __m256d px = _mm256_set1_pd(1.26177193074810590878e-4);
  px = _mm256_fmadd_pd(px, r2, _mm256_set1_pd(3.02994407707441961300e-2));
  px = _mm256_fmadd_pd(px, r2, _mm256_set1_pd(9.99999999999999999910e-1));
  px = _mm256_mul_pd(px, r);

  __m256d qx = _mm256_set1_pd(3.00198505138664455042e-6);
  qx = _mm256_fmadd_pd(qx, r2, _mm256_set1_pd(2.52448340349684104192e-3));
  qx = _mm256_fmadd_pd(qx, r2, _mm256_set1_pd(2.27265548208155028766e-1));
  qx = _mm256_fmadd_pd(qx, r2, _mm256_set1_pd(2.0));

  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  __m256d y = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  __m256i pow2 =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  y = _mm256_mul_pd(y, _mm256_castsi256_pd(pow2));

  __m256d under = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
  return _mm256_andnot_pd(under, y);
}

double sum_avx2(const double* x, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double min_avx2(const double* x, size_t n) {
  if (n < 4) {
    double m = x[0];
    for (size_t i = 1; i < n; ++i) m = x[i] < m ? x[i] : m;
    return m;
  }
  __m256d acc = _mm256_loadu_pd(x);
  size_t i = 4;
  for (; i + 4 <= n; i += 4) acc = _mm256_min_pd(acc, _mm256_loadu_pd(x + i));
  __m128d lo = _mm_min_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  double m = _mm_cvtsd_f64(_mm_min_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

void scale_avx2(double* x, size_t n, double a) {
  __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  }
  for (; i < n; ++i) x[i] *= a;
}

void squared_norms_avx2(const double* dx, const double* dy, double* out, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vx = _mm256_loadu_pd(dx + i);
    __m256d vy = _mm256_loadu_pd(dy + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vx, vx, _mm256_mul_pd(vy, vy)));
  }
  for (; i < n; ++i) out[i] = dx[i] * dx[i] + dy[i] * dy[i];
}

void exp_neg_scaled_avx2(const double* d2, double shift, double inv2s2, double* w,
                         size_t n) {
  __m256d vshift = _mm256_set1_pd(shift);
  __m256d vscale = _mm256_set1_pd(-inv2s2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d arg = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(d2 + i), vshift), vscale);
    _mm256_storeu_pd(w + i, _mm256_mul_pd(_mm256_loadu_pd(w + i), exp_pd(arg)));
  }
  for (; i < n; ++i) w[i] *= std::exp(-(d2[i] - shift) * inv2s2);
}

void weighted_sum2_avx2(const double* x, const double* y, const double* w, size_t n,
                        double* sx, double* sy) {
  __m256d ax = _mm256_setzero_pd();
  __m256d ay = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vw = _mm256_loadu_pd(w + i);
    ax = _mm256_fmadd_pd(vw, _mm256_loadu_pd(x + i), ax);
    ay = _mm256_fmadd_pd(vw, _mm256_loadu_pd(y + i), ay);
  }
  double rx = hsum(ax), ry = hsum(ay);
  for (; i < n; ++i) {
    rx += w[i] * x[i];
    ry += w[i] * y[i];
  }
  *sx = rx;
  *sy = ry;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{sum_avx2,           min_avx2,
                                 scale_avx2,         squared_norms_avx2,
                                 exp_neg_scaled_avx2, weighted_sum2_avx2,
                                 "avx2"};
  return &table;
}

}  // namespace crowdtrack::kernels

#else  // no AVX2/FMA at compile time

namespace crowdtrack::kernels {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace crowdtrack::kernels

#endif
