#include <random>

#include "doctest.h"
#include "qclab/catalog.hpp"
#include "qclab/curvature.hpp"

using namespace qclab;

namespace {

Eigen::MatrixXd random_orthogonal(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = nd(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
}

}  // namespace

TEST_SUITE("connection") {
TEST_CASE("flat model has a parallel frame and no torsion invariants") {
  const QCChart h = heisenberg(1);
  const auto u = h.sample_points(1, 12)[0];
  const ConnectionAtPoint c = ConnectionField(h, u).at(u);
  double omega = 0.0;
  for (const auto& o : c.omega) omega = std::max(omega, o.max_abs());
  CHECK(omega < 1e-8);
  CHECK(c.tensors.T0_norm() < 1e-8);
  CHECK(c.tensors.U_norm() < 1e-8);
  CHECK(c.horizontal.metricity < 1e-9);
  CHECK(c.horizontal.torsion < 1e-9);
}

TEST_CASE("homothety keeps the torsion invariants zero") {
  const QCChart c = catalog_chart("heisenberg-1-homothety");
  const auto u = c.sample_points(1, 3)[0];
  const ConnectionAtPoint cp = ConnectionField(c, u).at(u);
  CHECK(cp.tensors.T0_norm() < 1e-8);
  CHECK(cp.tensors.U_norm() < 1e-8);
}

TEST_CASE("deformed chart: torsion identities hold and T0 is nonzero") {
  const QCChart c = catalog_chart("heisenberg-1-mixed");
  for (const auto& u : c.sample_points(3, 4)) {
    const ConnectionAtPoint cp = ConnectionField(c, u).at(u);
    CHECK(cp.tensors.T0_norm() > 1e-3);
    CHECK(cp.split.max() < 1e-7);
    CHECK(cp.tensors.propt_T0 < 1e-7);
    CHECK(cp.tensors.newequiv < 1e-7);
    CHECK(cp.newtor < 1e-7);
    CHECK(cp.trace_free < 1e-7);
    CHECK(cp.xi.phi_transfer < 1e-7);
    CHECK(cp.vertical.q_residual < 1e-7);
  }
}

TEST_CASE("newtor check detects a perturbed torsion") {
  const QCChart c = catalog_chart("heisenberg-1-exp");
  const auto u = c.sample_points(1, 6)[0];
  const ConnectionAtPoint cp = ConnectionField(c, u).at(u);
  auto T = cp.vertical.T;
  T[1](0, 2) += 1e-3;
  CHECK(newtor_check(T, cp.tensors, cp.frame().I) > 5e-4);
  CHECK(newtor_check(cp.vertical.T, cp.tensors, cp.frame().I) < 1e-7);
}

TEST_CASE("invariants do not depend on the choice of H frame") {
  for (const char* name : {"heisenberg-1-exp", "heisenberg-2-exp"}) {
    CAPTURE(name);
    const QCChart c = catalog_chart(name);
    const auto u = c.sample_points(1, 9)[0];
    const CurvatureAtPoint a = CurvatureField(c, u).at(u);
    const CurvatureAtPoint b = CurvatureField(c, u, Settings{}, random_orthogonal(4 * c.n(), 17)).at(u);
    CHECK(a.conn.tensors.T0_norm() == doctest::Approx(b.conn.tensors.T0_norm()).epsilon(1e-7));
    CHECK(a.conn.tensors.U_norm() == doctest::Approx(b.conn.tensors.U_norm()).scale(1.0).epsilon(1e-7));
    CHECK(a.scal == doctest::Approx(b.scal).scale(1.0).epsilon(1e-6));
  }
}

TEST_CASE("torsion split rejects a non-torsion endomorphism in strict mode") {
  const QuaternionTriple I = standard_triple(1);
  std::array<EndoMatrix, 3> T{EndoMatrix::identity(1), EndoMatrix(1), EndoMatrix(1)};
  CHECK_THROWS_AS(torsion_split(T, I), Error);
  const TorsionSplit loose = torsion_split(T, I, Tolerances{}, false);
  CHECK(loose.max() > 1e-3);
}
}
