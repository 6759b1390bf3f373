#include "qclab/simd/kernels.hpp"

namespace qclab::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
  return s;
}

void axpby_scalar(double alpha, const double* x, double beta, double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void gemm_scalar(const double* a, const double* b, double* c, std::size_t dim) {
  for (std::size_t i = 0; i < dim * dim; ++i) c[i] = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double aik = a[i * dim + k];
      for (std::size_t j = 0; j < dim; ++j) c[i * dim + j] += aik * b[k * dim + j];
    }
  }
}

void gemm_tn_scalar(const double* a, const double* b, double* c, std::size_t dim) {
  for (std::size_t i = 0; i < dim * dim; ++i) c[i] = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double aki = a[k * dim + i];
      for (std::size_t j = 0; j < dim; ++j) c[i * dim + j] += aki * b[k * dim + j];
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{dot_scalar, axpby_scalar, gemm_scalar, gemm_tn_scalar};
  return table;
}

}  // namespace qclab::simd
