#include "boreuq/kernels.hpp"

#include <cstdlib>
#include <string>

namespace boreuq::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::product_sum, &scalar::gauss_sum};
#if defined(BOREUQ_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::product_sum, &avx2::gauss_sum};
#endif

const KernelTable& select() {
  if (const char* env = std::getenv("BOREUQ_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return kScalar;
    if (want == "avx2") return table_for(Isa::avx2);
  }
  return isa_supported(Isa::avx2) ? table_for(Isa::avx2) : kScalar;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(BOREUQ_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
#if defined(BOREUQ_HAVE_AVX2)
  if (isa == Isa::avx2 && isa_supported(Isa::avx2)) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

std::string_view isa_name(Isa isa) {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

}  // namespace boreuq::kernels
