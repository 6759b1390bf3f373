// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "qclab/simd/kernels.hpp"

namespace qclab::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < len; ++i) s += a[i] * b[i];
  return s;
}

void axpby_avx2(double alpha, const double* x, double beta, double* y, std::size_t len) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d vy = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy));
  }
  for (; i < len; ++i) y[i] = alpha * x[i] + beta * y[i];
}

// Row i of C accumulates a[i,k] * row k of B; columns are processed four at a time.
void gemm_avx2(const double* a, const double* b, double* c, std::size_t dim) {
  const std::size_t vec_end = dim - dim % 4;
  for (std::size_t i = 0; i < dim; ++i) {
    double* crow = c + i * dim;
    for (std::size_t j = 0; j < vec_end; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(a[i * dim + k]), _mm256_loadu_pd(b + k * dim + j), acc);
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (std::size_t j = vec_end; j < dim; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += a[i * dim + k] * b[k * dim + j];
      crow[j] = s;
    }
  }
}

void gemm_tn_avx2(const double* a, const double* b, double* c, std::size_t dim) {
  const std::size_t vec_end = dim - dim % 4;
  for (std::size_t i = 0; i < dim; ++i) {
    double* crow = c + i * dim;
    for (std::size_t j = 0; j < vec_end; j += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (std::size_t k = 0; k < dim; ++k) {
        acc = _mm256_fmadd_pd(_mm256_set1_pd(a[k * dim + i]), _mm256_loadu_pd(b + k * dim + j), acc);
      }
      _mm256_storeu_pd(crow + j, acc);
    }
    for (std::size_t j = vec_end; j < dim; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += a[k * dim + i] * b[k * dim + j];
      crow[j] = s;
    }
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{dot_avx2, axpby_avx2, gemm_avx2, gemm_tn_avx2};
  return &table;
}

}  // namespace qclab::simd
