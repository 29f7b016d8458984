#include <cstdlib>
#include <string_view>

#include "msr/simd/kernels.hpp"

namespace msr::simd {

#ifdef MSR_HAVE_AVX2_TU
namespace detail {
const Kernels& avx2_table();
}
#endif

bool avx2_available() {
#ifdef MSR_HAVE_AVX2_TU
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok;
#else
  return false;
#endif
}

const Kernels* by_name(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
#ifdef MSR_HAVE_AVX2_TU
  if (name == "avx2" && avx2_available()) return &detail::avx2_table();
#endif
  return nullptr;
}

const Kernels& active() {
  static const Kernels& chosen = []() -> const Kernels& {
    if (const char* env = std::getenv("MSR_SIMD")) {
      if (const Kernels* k = by_name(env)) return *k;
    }
    if (const Kernels* k = by_name("avx2")) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace msr::simd
