#include <cstdlib>
#include <string>

#include "emx/common.hpp"
#include "emx/kernels.hpp"

namespace emx::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "?";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(EMX_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(EMX_HAVE_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw Error(ErrorCode::invalid_argument,
                "kernel ISA not available: " + std::string(to_string(isa)));
  }
  switch (isa) {
#if defined(EMX_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table;
#endif
#if defined(EMX_HAVE_NEON)
    case Isa::neon: return detail::neon_table;
#endif
    default: return detail::scalar_table;
  }
}

namespace {

const KernelTable& select() {
  if (const char* forced = std::getenv("EMX_KERNELS")) {
    const std::string name = forced;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == to_string(isa)) return table(isa);
    }
    throw Error(ErrorCode::invalid_argument, "unknown EMX_KERNELS value: " + name);
  }
  for (Isa isa : {Isa::avx2, Isa::neon}) {
    if (supported(isa)) return table(isa);
  }
  return detail::scalar_table;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace emx::kernels
