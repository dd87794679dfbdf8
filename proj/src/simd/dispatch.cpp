#include "nematic/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace nematic::simd {

const Kernels& active() {
  static const Kernels* chosen = [] {
    const char* env = std::getenv("NEMATIC_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (const Kernels* k = avx2_kernels()) return k;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace nematic::simd
