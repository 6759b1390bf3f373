#pragma once

#include <cstddef>
#include <string_view>

// Dense inner loops used by the endomorphism algebra. Every kernel has a
// scalar reference implementation; an AVX2+FMA variant is selected at
// runtime when the CPU supports it. Set QCLAB_SIMD=scalar to force the
// reference path.

namespace qclab::simd {

enum class Backend { Scalar, Avx2 };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t len);
  // y[i] = alpha * x[i] + beta * y[i]
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t len);
  // C = A * B for row-major square matrices of order dim
  void (*gemm)(const double* a, const double* b, double* c, std::size_t dim);
  // C = A^T * B for row-major square matrices of order dim
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t dim);
};

const KernelTable& scalar_kernels();
// nullptr when the translation unit was not built for this architecture.
const KernelTable* avx2_kernels();

bool cpu_supports(Backend b);

// Currently selected table. The first call reads QCLAB_SIMD and probes the CPU.
const KernelTable& kernels();
Backend active_backend();
// Returns false (and leaves the selection unchanged) if the backend is unavailable.
bool force_backend(Backend b);
std::string_view backend_name(Backend b);

inline double dot(const double* a, const double* b, std::size_t len) { return kernels().dot(a, b, len); }
inline void axpby(double alpha, const double* x, double beta, double* y, std::size_t len) {
  kernels().axpby(alpha, x, beta, y, len);
}
inline void gemm(const double* a, const double* b, double* c, std::size_t dim) { kernels().gemm(a, b, c, dim); }
inline void gemm_tn(const double* a, const double* b, double* c, std::size_t dim) {
  kernels().gemm_tn(a, b, c, dim);
}

}  // namespace qclab::simd
