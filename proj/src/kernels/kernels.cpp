#include "crowdtrack/kernels/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace crowdtrack::kernels {
namespace {

const KernelTable* g_active = nullptr;

const KernelTable* pick_default() {
  const KernelTable* avx2 = avx2_supported() ? avx2_table() : nullptr;
  if (const char* env = std::getenv("CROWDTRACK_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return &scalar_table();
    if (v == "avx2") {
      if (!avx2) throw std::invalid_argument("CROWDTRACK_KERNELS=avx2: not supported here");
      return avx2;
    }
    // anything else (incl. "auto") falls through to auto-detection
  }
  return avx2 ? avx2 : &scalar_table();
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
         avx2_table() != nullptr;
#else
  return false;
#endif
}

const KernelTable& active() {
  if (!g_active) g_active = pick_default();
  return *g_active;
}

Backend active_backend() {
  return &active() == &scalar_table() ? Backend::Scalar : Backend::Avx2;
}

void set_backend(Backend b) {
  if (b == Backend::Scalar) {
    g_active = &scalar_table();
    return;
  }
  if (!avx2_supported()) {
    throw std::invalid_argument("kernels: avx2 backend not supported on this CPU");
  }
  g_active = avx2_table();
}

}  // namespace crowdtrack::kernels
