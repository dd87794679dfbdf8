#pragma once

#include <cstddef>

// Inner loops of the spherical-harmonic transforms. Every kernel has a scalar
// reference version; the AVX2 version is picked at runtime when the CPU has it.
// NEMATIC_SIMD=scalar|avx2 in the environment forces a choice.
namespace nematic::simd {

struct Kernels {
  const char* name;
  // out[0] = sum a*x, out[1] = sum a*y
  void (*dot2)(const double* a, const double* x, const double* y, std::size_t n, double* out);
  // o1 += a*p, o2 += b*p
  void (*axpy2)(double a, double b, const double* p, double* o1, double* o2, std::size_t n);
  // out += a*x + b*y
  void (*fma2)(double a, const double* x, double b, const double* y, double* out, std::size_t n);
  // out = a*b elementwise
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
};

const Kernels& scalar_kernels();
// nullptr when not compiled in or not supported by this CPU.
const Kernels* avx2_kernels();
const Kernels& active();

}  // namespace nematic::simd
