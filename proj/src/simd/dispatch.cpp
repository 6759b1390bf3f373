#include <atomic>
#include <cstdlib>
#include <string>

#include "qclab/simd/kernels.hpp"

namespace qclab::simd {

#ifndef QCLAB_HAVE_AVX2_TU
const KernelTable* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(QCLAB_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return avx2_kernels() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

Backend initial_backend() {
  if (const char* env = std::getenv("QCLAB_SIMD")) {
    if (std::string(env) == "scalar") return Backend::Scalar;
  }
  return cpu_supports(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& selected() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

const KernelTable& kernels() {
  return active_backend() == Backend::Avx2 ? *avx2_kernels() : scalar_kernels();
}

bool force_backend(Backend b) {
  if (!cpu_supports(b)) return false;
  selected().store(b, std::memory_order_relaxed);
  return true;
}

std::string_view backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

}  // namespace qclab::simd
