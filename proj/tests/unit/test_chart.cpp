#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "qclab/catalog.hpp"
#include "qclab/config_io.hpp"

using namespace qclab;

namespace {

QCChart chart_from_eta(const std::array<std::vector<std::string>, 3>& eta) {
  ChartConfig cfg;
  cfg.name = "test";
  cfg.n = 1;
  cfg.eta = eta;
  return chart_from_config(cfg);
}

ErrorKind frame_error(const QCChart& c, const std::vector<double>& u) {
  try {
    frame_field(c, u);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a frame error");
  return ErrorKind::IoError;
}

}  // namespace

TEST_SUITE("chart") {
TEST_CASE("heisenberg frame regression") {
  const QCChart h = heisenberg(1);
  const PointFrame fr = frame_field(h, h.origin());
  CHECK(fr.bi1_residual < 1e-14);
  // Reeb fields are 2 d/dt_s everywhere.
  for (const auto& u : h.sample_points(5, 3)) {
    const PointFrame f = frame_field(h, u);
    for (int s = 0; s < 3; ++s)
      for (int r = 0; r < 7; ++r) CHECK(f.xi(r, s) == doctest::Approx(r == 4 + s ? 2.0 : 0.0).epsilon(1e-12));
    CHECK(check_frame(h, f).max() < 1e-12);
    CHECK(quaternion_residual(f.I) < 1e-12);
  }
}

TEST_CASE("recovered structure on the heisenberg group") {
  const QCChart h = heisenberg(2);
  const RecoveredStructure st = recover_structure(h, h.sample_points(1, 8)[0]);
  CHECK(st.quaternion_residual < 1e-12);
  CHECK(st.levi_residual < 1e-12);
  CHECK(st.metric_consistency < 1e-12);
  CHECK(st.N.cols() == 8);
}

TEST_CASE("conformal frames satisfy the invariants") {
  const QCChart c = catalog_chart("heisenberg-1-mixed");
  for (const auto& u : c.sample_points(5, 2)) {
    const PointFrame f = frame_field(c, u);
    CHECK(check_frame(c, f).max() < 1e-10);
    CHECK(f.bi1_residual < 1e-9);
  }
}

TEST_CASE("a perturbed coframe fails the Biquard condition") {
  const QCChart bad = chart_from_eta({{{"-u2 + 0.3*u6", "u1", "-u4", "u3", "0.5", "0", "0"},
                                       {"-u3", "u4", "u1", "-u2", "0", "0.5", "0"},
                                       {"-u4", "-u3", "u2", "u1", "0", "0", "0.5"}}});
  const std::vector<double> u{0.2, -0.1, 0.3, 0.1, 0.0, 0.4, -0.2};
  const ErrorKind k = frame_error(bad, u);
  CHECK((k == ErrorKind::BiquardConditionFail || k == ErrorKind::NotQuaternionic));
  const PointValidation pv = validate_point(bad, u);
  CHECK_FALSE(pv.ok);
}

TEST_CASE("degenerate coframes are rejected") {
  const QCChart rank2 = chart_from_eta({{{"-u2", "u1", "-u4", "u3", "0.5", "0", "0"},
                                         {"-u2", "u1", "-u4", "u3", "0.5", "0", "0"},
                                         {"-u4", "-u3", "u2", "u1", "0", "0", "0.5"}}});
  CHECK(frame_error(rank2, rank2.origin()) == ErrorKind::DegenerateCoframe);
  const QCChart closed = chart_from_eta({{{"0", "0", "0", "0", "1", "0", "0"},
                                          {"0", "0", "0", "0", "0", "1", "0"},
                                          {"0", "0", "0", "0", "0", "0", "1"}}});
  CHECK(frame_error(closed, closed.origin()) == ErrorKind::DegenerateLevi);
}

TEST_CASE("sample points are deterministic and inside the domain") {
  const QCChart h = heisenberg(1);
  const auto a = h.sample_points(10, 42);
  const auto b = h.sample_points(10, 42);
  CHECK(a == b);
  CHECK(a != h.sample_points(10, 43));
  for (const auto& u : a) CHECK(h.in_domain(u));
}

TEST_CASE("frame field pivots are fixed at the anchor") {
  const QCChart c = catalog_chart("heisenberg-1-exp");
  const auto u = c.sample_points(1, 5)[0];
  const FrameField ff(c, u);
  CHECK(ff.pivots().size() == 4);
  // Nearby points reuse the anchor pivots, so the frame varies smoothly.
  std::vector<double> v = u;
  v[0] += 1e-4;
  const double jump = (ff.at(v).eH - ff.at(u).eH).cwiseAbs().maxCoeff();
  CHECK(jump < 1e-3);
}
}

TEST_SUITE("catalog") {
TEST_CASE("every built-in chart builds and validates at its origin") {
  for (const auto& e : catalog_entries()) {
    CAPTURE(e.name);
    const QCChart c = catalog_chart(e.name);
    CHECK(c.n() == e.n);
    CHECK(validate_point(c, c.origin()).ok);
  }
}

TEST_CASE("catalog errors") {
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  CHECK(kind([] { catalog_chart("no-such-chart"); }) == ErrorKind::SchemaError);
  CHECK(kind([] { heisenberg(3); }) == ErrorKind::UnsupportedDimension);
  CHECK(kind([] { conformal(heisenberg(1), "u1 - 2"); }) == ErrorKind::NonPositiveFactor);
}

TEST_CASE("heisenberg coframe uses the J matrices") {
  const QCChart h = heisenberg(1);
  const std::vector<double> u{0.1, 0.2, 0.3, 0.4, 0.0, 0.0, 0.0};
  const Eigen::MatrixXd C = eval_coframe(h, u);
  for (int s = 0; s < 3; ++s) {
    const Eigen::MatrixXd J = heisenberg_J(1, s);
    for (int b = 0; b < 4; ++b) {
      double ref = 0.0;
      for (int a = 0; a < 4; ++a) ref += J(a, b) * u[a];
      CHECK(C(s, b) == doctest::Approx(ref));
    }
    CHECK(C(s, 4 + s) == doctest::Approx(0.5));
  }
}

TEST_CASE("spherical factor text") {
  CHECK(spherical_factor(1).find("x4^2") != std::string::npos);
  CHECK(spherical_factor(2).find("x8^2") != std::string::npos);
}
}
