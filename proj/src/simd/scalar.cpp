#include "nematic/simd.hpp"

namespace nematic::simd {
namespace {

void dot2(const double* a, const double* x, const double* y, std::size_t n, double* out) {
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += a[i] * x[i];
    sy += a[i] * y[i];
  }
  out[0] = sx;
  out[1] = sy;
}

void axpy2(double a, double b, const double* p, double* o1, double* o2, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    o1[i] += a * p[i];
    o2[i] += b * p[i];
  }
}

void fma2(double a, const double* x, double b, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a * x[i] + b * y[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", dot2, axpy2, fma2, mul};
  return k;
}

}  // namespace nematic::simd
