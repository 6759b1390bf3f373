#include <random>

#include "doctest.h"
#include "qclab/algebra.hpp"

using namespace qclab;

namespace {

EndoMatrix random_endo(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  EndoMatrix e(n);
  for (auto& v : e.data()) v = nd(rng);
  return e;
}

}  // namespace

TEST_SUITE("algebra") {
TEST_CASE("standard triple satisfies the quaternion relations") {
  for (int n = 1; n <= 4; ++n) {
    const QuaternionTriple t = standard_triple(n);
    CHECK(quaternion_residual(t) < 1e-15);
    CHECK((t[0] * t[1] - t[2]).max_abs() < 1e-15);
    for (int s = 0; s < 3; ++s) {
      CHECK(endo_inner(t[s], t[s]) == doctest::Approx(1.0));
      const VTriple p = project_sp1(t[s], t);
      for (int r = 0; r < 3; ++r) CHECK(p[r] == doctest::Approx(r == s ? 1.0 : 0.0));
    }
  }
}

TEST_CASE("a perturbed triple is detected") {
  QuaternionTriple t = standard_triple(1);
  t[2](0, 1) += 1e-6;
  CHECK(quaternion_residual(t) > 1e-7);
}

TEST_CASE("four-part decomposition is complete and has the sign pattern") {
  std::mt19937_64 rng(5);
  for (int n : {1, 2}) {
    const QuaternionTriple t = standard_triple(n);
    for (int k = 0; k < 10; ++k) {
      const EndoMatrix psi = random_endo(n, rng);
      const FourPartSplit p = four_part_decompose(psi, t);
      CHECK((p.p_ppp + p.p_pmm + p.p_mpm + p.p_mmp - psi).max_abs() < 1e-14);
      CHECK(four_part_sign_residual(p, t) < 1e-14);
      // The +++ part commutes with every I_s.
      for (int s = 0; s < 3; ++s) CHECK(commutator(p.p_ppp, t[s]).max_abs() < 1e-14);
    }
  }
}

TEST_CASE("projections are idempotent and orthogonal") {
  std::mt19937_64 rng(9);
  const QuaternionTriple t = standard_triple(2);
  for (int k = 0; k < 10; ++k) {
    const EndoMatrix psi = random_endo(2, rng);
    const EndoMatrix a = sp1_part(psi, t);
    const EndoMatrix p = project_P(psi, t);
    const EndoMatrix ts = project_torsion_space(psi, t);
    CHECK((sp1_part(a, t) - a).max_abs() < 1e-14);
    CHECK((project_P(p, t) - p).max_abs() < 1e-14);
    CHECK((project_torsion_space(ts, t) - ts).max_abs() < 1e-14);
    CHECK(std::abs(endo_inner(a, psi - a)) < 1e-14);
    CHECK(std::abs(endo_inner(p, psi - p)) < 1e-14);
    CHECK(std::abs(endo_inner(ts, psi - ts)) < 1e-14);
    // The sp(1) and torsion-space parts never overlap.
    CHECK(project_torsion_space(a, t).max_abs() < 1e-14);
  }
}

TEST_CASE("endomorphism construction checks the shape") {
  CHECK_THROWS_AS(EndoMatrix::from_matrix(Eigen::MatrixXd::Zero(3, 3)), Error);
  CHECK_THROWS_AS(EndoMatrix::from_matrix(Eigen::MatrixXd::Zero(4, 8)), Error);
  const EndoMatrix e = EndoMatrix::from_matrix(Eigen::MatrixXd::Identity(8, 8));
  CHECK(e.n() == 2);
  CHECK(e.trace() == doctest::Approx(8.0));
}

TEST_CASE("vector helpers") {
  const VTriple c = v_cross({1, 0, 0}, {0, 1, 0});
  CHECK(c[2] == doctest::Approx(1.0));
  CHECK(v_dot({1, 2, 3}, {4, 5, 6}) == doctest::Approx(32.0));
}
}
