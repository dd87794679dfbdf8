#include "nematic/simd.hpp"

#if defined(NEMATIC_HAVE_AVX2) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace nematic::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void dot2(const double* a, const double* x, const double* y, std::size_t n, double* out) {
  __m256d sx0 = _mm256_setzero_pd(), sx1 = _mm256_setzero_pd();
  __m256d sy0 = _mm256_setzero_pd(), sy1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a0 = _mm256_loadu_pd(a + i), a1 = _mm256_loadu_pd(a + i + 4);
    sx0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(x + i), sx0);
    sx1 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(x + i + 4), sx1);
    sy0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(y + i), sy0);
    sy1 = _mm256_fmadd_pd(a1, _mm256_loadu_pd(y + i + 4), sy1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d a0 = _mm256_loadu_pd(a + i);
    sx0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(x + i), sx0);
    sy0 = _mm256_fmadd_pd(a0, _mm256_loadu_pd(y + i), sy0);
  }
  double sx = hsum(_mm256_add_pd(sx0, sx1));
  double sy = hsum(_mm256_add_pd(sy0, sy1));
  for (; i < n; ++i) {
    sx += a[i] * x[i];
    sy += a[i] * y[i];
  }
  out[0] = sx;
  out[1] = sy;
}

void axpy2(double a, double b, const double* p, double* o1, double* o2, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vp = _mm256_loadu_pd(p + i);
    _mm256_storeu_pd(o1 + i, _mm256_fmadd_pd(va, vp, _mm256_loadu_pd(o1 + i)));
    _mm256_storeu_pd(o2 + i, _mm256_fmadd_pd(vb, vp, _mm256_loadu_pd(o2 + i)));
  }
  for (; i < n; ++i) {
    o1[i] += a * p[i];
    o2[i] += b * p[i];
  }
}

void fma2(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_loadu_pd(out + i);
    acc = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), acc);
    acc = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), acc);
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) out[i] += a * x[i] + b * y[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace

const Kernels* avx2_kernels() {
  static const Kernels k{"avx2", dot2, axpy2, fma2, mul};
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &k : nullptr;
}

}  // namespace nematic::simd

#else

namespace nematic::simd {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace nematic::simd

#endif
