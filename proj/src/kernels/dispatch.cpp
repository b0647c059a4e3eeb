#include "mlppde/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace mlppde::kern {

namespace {

bool cpu_has_avx2() {
#if MLPPDE_HAVE_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_table();
#if MLPPDE_HAVE_AVX2
  if (name == "avx2" && cpu_has_avx2()) return &avx2_table();
#endif
  if (name == "auto" || name.empty()) {
#if MLPPDE_HAVE_AVX2
    if (cpu_has_avx2()) return &avx2_table();
#endif
    return &scalar_table();
  }
  return nullptr;
}

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* initial_pick() {
  const char* env = std::getenv("MLPPDE_KERNEL");
  const KernelTable* t = resolve(env ? env : "auto");
  return t ? t : &scalar_table();
}

} // namespace

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = initial_pick();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

bool select_backend(std::string_view name) {
  const KernelTable* t = resolve(name);
  if (!t) return false;
  g_active.store(t, std::memory_order_release);
  return true;
}

std::vector<std::string> available_backends() {
  std::vector<std::string> out{"scalar"};
  if (cpu_has_avx2()) out.push_back("avx2");
  return out;
}

} // namespace mlppde::kern
