#include "freqkan/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace freqkan::kernels {

#if !defined(FREQKAN_HAVE_AVX2)
const Ops* avx2_ops() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(FREQKAN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const Ops*> g_active{nullptr};

const Ops* resolve_initial() {
  if (const char* env = std::getenv("FREQKAN_LANE")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0) {
      if (cpu_has_avx2() && avx2_ops()) return avx2_ops();
      throw std::runtime_error(
          "FREQKAN_LANE=avx2 requested but AVX2 is unavailable in this "
          "build/CPU");
    }
    if (std::strcmp(env, "auto") != 0)
      throw std::runtime_error(
          std::string("unknown FREQKAN_LANE value '") + env +
          "' (expected auto, scalar or avx2)");
  }
  if (cpu_has_avx2() && avx2_ops()) return avx2_ops();
  return &scalar_ops();
}

}  // namespace

const Ops& ops() {
  const Ops* p = g_active.load(std::memory_order_acquire);
  if (!p) {
    p = resolve_initial();
    g_active.store(p, std::memory_order_release);
  }
  return *p;
}

bool set_lane(Lane lane) {
  switch (lane) {
    case Lane::scalar:
      g_active.store(&scalar_ops(), std::memory_order_release);
      return true;
    case Lane::avx2:
      if (cpu_has_avx2() && avx2_ops()) {
        g_active.store(avx2_ops(), std::memory_order_release);
        return true;
      }
      return false;
    case Lane::auto_detect:
      g_active.store(cpu_has_avx2() && avx2_ops() ? avx2_ops() : &scalar_ops(),
                     std::memory_order_release);
      return true;
  }
  return false;
}

Lane active_lane() {
  return &ops() == &scalar_ops() ? Lane::scalar : Lane::avx2;
}

std::string lane_name() { return ops().name; }

bool avx2_available() { return cpu_has_avx2() && avx2_ops(); }

}  // namespace freqkan::kernels
