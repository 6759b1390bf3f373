#include <cmath>

#include "doctest.h"
#include "qclab/catalog.hpp"
#include "qclab/twistor.hpp"

using namespace qclab;

TEST_SUITE("twistor") {
TEST_CASE("gauge rotation maps e1 to x") {
  for (const VTriple& x : std::vector<VTriple>{{1, 0, 0}, {-1, 0, 0}, {0, 0.6, 0.8}, {-0.6, 0, -0.8}}) {
    const Eigen::Matrix3d R = gauge_rotation(x);
    CHECK((R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(R.determinant() == doctest::Approx(1.0));
    for (int s = 0; s < 3; ++s) CHECK(R(s, 0) == doctest::Approx(x[s]));
  }
}

TEST_CASE("fibonacci sphere is unit, deterministic and seed dependent") {
  const auto a = fibonacci_sphere(20, 7);
  CHECK(a == fibonacci_sphere(20, 7));
  CHECK(a != fibonacci_sphere(20, 8));
  for (const auto& x : a) CHECK(v_dot(x, x) == doctest::Approx(1.0));
}

TEST_CASE("twistor points normalize and reject zero") {
  const TwistorPoint tp = TwistorPoint::make({0.0}, {0.0, 3.0, 4.0});
  CHECK(tp.x[1] == doctest::Approx(0.6));
  CHECK_THROWS_AS(TwistorPoint::make({0.0}, {0.0, 0.0, 0.0}), Error);
}

TEST_CASE("contact metric identities and signature") {
  const QCChart c = catalog_chart("heisenberg-2-exp");
  const auto u = c.sample_points(1, 31)[0];
  const PointFrame fr = frame_field(c, u);
  for (const auto& x : fibonacci_sphere(4, 3)) {
    const TwistorContext ctx = TwistorContext::from(fr, x, 0.7);
    const ContactIdentities ci = contact_identities(ctx);
    CHECK(ci.phi_square < 1e-13);
    CHECK(ci.g_compatible < 1e-12);
    CHECK(ci.deta_g < 1e-12);
    CHECK(ci.g_definition < 1e-12);
    CHECK(ci.g_chi < 1e-12);
    const Signature sig = metric_signature(ctx);
    CHECK(sig.positive == 11);
    CHECK(sig.negative == 2);
    CHECK(eta_Z(ctx, ctx.chi()) == doctest::Approx(1.0));
  }
}

TEST_CASE("verdict thresholds") {
  const Tolerances tol;
  CHECK(normality_verdict(1e-6, 1e-7, tol) == Verdict::normal);
  CHECK(normality_verdict(1e-2, 1e-2, tol) == Verdict::not_normal);
  CHECK(normality_verdict(5e-4, 1e-7, tol) == Verdict::inconclusive);
  CHECK(verdict_name(Verdict::not_normal) == "not_normal");
}

TEST_CASE("flat and spherical charts are normal, the deformed chart is not") {
  const QCChart sphere = conformal(heisenberg(1), spherical_factor(1), "spherical-1");
  const auto u = sphere.sample_points(1, 32)[0];
  const CurvatureAtPoint cp = CurvatureField(sphere, u).at(u, true);
  const TwistorReport rep = lie_chi_G(cp, {0.3, -0.5, 0.8});
  CHECK(rep.verdict == Verdict::normal);
  CHECK(rep.tau == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(std::max({rep.mte2, rep.mte3, rep.mte4}) < 1e-4);

  const QCChart def = catalog_chart("heisenberg-1-exp");
  const auto v = def.sample_points(1, 33)[0];
  const CurvatureAtPoint dp = CurvatureField(def, v).at(v, true);
  const TwistorReport drep = lie_chi_G(dp, {0.0, 1.0, 0.0});
  CHECK(drep.verdict == Verdict::not_normal);
  // The HH block is twice T0 along the rotated first Reeb field.
  CHECK(drep.LchiG_HH.norm() > 1e-2);
}

TEST_CASE("fibre consistency: T0 is shared by all fibre points") {
  const QCChart def = catalog_chart("heisenberg-1-mixed");
  const auto u = def.sample_points(1, 34)[0];
  const CurvatureAtPoint cp = CurvatureField(def, u).at(u, true);
  const auto xs = fibonacci_sphere(5, 4);
  const TwistorReport first = lie_chi_G(cp, xs[0]);
  double hh_sum = 0.0;
  for (const auto& x : xs) {
    const TwistorReport r = lie_chi_G(cp, x);
    CHECK(r.T0_norm == doctest::Approx(first.T0_norm));
    hh_sum += r.LchiG_HH.trace();
  }
  // T0_{xi'_1} is trace-free for every fibre point.
  CHECK(std::abs(hh_sum) < 1e-8);
}

TEST_CASE("direct oracles agree with the closed forms") {
  const QCChart def = catalog_chart("heisenberg-1-mixed");
  const auto u = def.sample_points(1, 35)[0];
  const CurvatureField cf(def, u);
  const CurvatureAtPoint cp = cf.at(u, true);
  const TwistorReport rep = lie_chi_G(cp, {0.6, 0.0, -0.8});
  const OracleResult o = normality_direct_oracle(cf, rep, 10, 1);
  CHECK(o.matrix_deviation < 1e-4);
  CHECK(o.pair_deviation < 1e-4);
  CHECK(o.hh_deviation < 1e-5);
  CHECK(o.vertical_max < 1e-4);
  const DEtaOracle de = d_eta_Z_oracle(cf, rep.tp, cp.tau);
  CHECK(de.deviation < 1e-5);
  CHECK(de.xi23 == doctest::Approx(-2.0 * cp.tau).epsilon(1e-5));
}

TEST_CASE("CR check: integrable J passes, flipped fibre J fails") {
  const QCChart def = catalog_chart("heisenberg-1-exp");
  const auto u = def.sample_points(1, 36)[0];
  const CurvatureField cf(def, u);
  const TwistorPoint tp = TwistorPoint::make(u, {0.2, 0.9, -0.3});
  CHECK(cr_nijenhuis_residual(cf, tp, 10, 5).nijenhuis < 1e-4);
  CHECK(cr_nijenhuis_residual(cf, tp, 10, 5, true).nijenhuis > 1e-2);
}
}
