#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qclab/simd/kernels.hpp"

using namespace qclab::simd;

namespace {

std::vector<double> random_vec(std::size_t len, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<double> v(len);
  for (auto& x : v) x = ud(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("simd") {
TEST_CASE("scalar kernels match naive loops") {
  std::mt19937_64 rng(3);
  const KernelTable& k = scalar_kernels();
  for (std::size_t dim : {4u, 8u, 12u}) {
    const auto a = random_vec(dim * dim, rng);
    const auto b = random_vec(dim * dim, rng);
    std::vector<double> c(dim * dim), ct(dim * dim), ref(dim * dim, 0.0), reft(dim * dim, 0.0);
    k.gemm(a.data(), b.data(), c.data(), dim);
    k.gemm_tn(a.data(), b.data(), ct.data(), dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        for (std::size_t l = 0; l < dim; ++l) {
          ref[i * dim + j] += a[i * dim + l] * b[l * dim + j];
          reft[i * dim + j] += a[l * dim + i] * b[l * dim + j];
        }
    CHECK(max_diff(c, ref) < 1e-14);
    CHECK(max_diff(ct, reft) < 1e-14);
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr || !cpu_supports(Backend::Avx2)) {
    MESSAGE("AVX2 unavailable, skipped");
    return;
  }
  const KernelTable& s = scalar_kernels();
  std::mt19937_64 rng(11);
  for (std::size_t len = 0; len < 41; ++len) {
    const auto a = random_vec(len, rng);
    const auto b = random_vec(len, rng);
    CHECK(std::abs(s.dot(a.data(), b.data(), len) - v->dot(a.data(), b.data(), len)) < 1e-13);
    auto y1 = b;
    auto y2 = b;
    s.axpby(0.7, a.data(), -1.3, y1.data(), len);
    v->axpby(0.7, a.data(), -1.3, y2.data(), len);
    CHECK(max_diff(y1, y2) < 1e-14);
  }
  for (std::size_t dim : {4u, 8u, 12u, 16u}) {
    const auto a = random_vec(dim * dim, rng);
    const auto b = random_vec(dim * dim, rng);
    std::vector<double> c1(dim * dim), c2(dim * dim);
    s.gemm(a.data(), b.data(), c1.data(), dim);
    v->gemm(a.data(), b.data(), c2.data(), dim);
    CHECK(max_diff(c1, c2) < 1e-13);
    s.gemm_tn(a.data(), b.data(), c1.data(), dim);
    v->gemm_tn(a.data(), b.data(), c2.data(), dim);
    CHECK(max_diff(c1, c2) < 1e-13);
  }
}

TEST_CASE("backend selection can be forced and restored") {
  const Backend before = active_backend();
  CHECK(force_backend(Backend::Scalar));
  CHECK(active_backend() == Backend::Scalar);
  CHECK(backend_name(Backend::Scalar) == "scalar");
  CHECK(force_backend(before));
  CHECK(active_backend() == before);
}
}
