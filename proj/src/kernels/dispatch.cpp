#include <cstdlib>
#include <string_view>

#include "gridlock/kernels.hpp"

namespace gridlock::kernels {

const KernelTable& active() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* env = std::getenv("GRIDLOCK_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return scalar_table();
    if (const KernelTable* t = avx2_table()) return *t;
    return scalar_table();
  }();
  return table;
}

}  // namespace gridlock::kernels
