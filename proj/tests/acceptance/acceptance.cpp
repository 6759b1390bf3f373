// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// here, independent of the library defaults.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qclab/catalog.hpp"
#include "qclab/report.hpp"
#include "qclab/twistor.hpp"

using namespace qclab;

namespace {

constexpr double kAlgebraTol = 1e-12;
constexpr double kBi1Tol = 1e-9;
constexpr double kFlatTensorTol = 1e-6;
constexpr double kFlatScalTol = 1e-6;
constexpr double kSlotTol = 1e-5;
constexpr double kDeformedT0Min = 1e-4;
constexpr double kDeformedResidualMin = 1e-3;
constexpr double kDeformedFraction = 0.9;
constexpr double kHHTol = 1e-5;
constexpr double kOracleTol = 1e-4;
constexpr double kRicciTol = 1e-4;
constexpr double kTorsionTol = 1e-7;
constexpr double kUTensorTol = 1e-8;
constexpr double kPhiSquareTol = 1e-12;
constexpr double kContactTol = 1e-8;
constexpr double kDEtaTol = 1e-5;
constexpr double kCRTol = 1e-4;
constexpr double kLeviInvTol = 1e-5;
constexpr double kMTETol = 1e-4;
constexpr double kCommuteTol = 1e-4;
constexpr double kCommuteViolationMin = 1e-3;

constexpr double kAlgebraSeconds = 5.0;
constexpr double kFlatSeconds = 30.0;
constexpr double kSuiteSeconds = 300.0;

constexpr int kPoints = 20;
constexpr int kSmokePoints = 5;
constexpr int kOraclePairs = 20;
constexpr std::uint64_t kSeed = 20240601;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-34s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Conjugate of the standard triple by a random orthogonal matrix, rotated in
// the Sp(1) factor as well.
QuaternionTriple random_triple(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  const int d = 4 * n;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = nd(rng);
  const Eigen::MatrixXd O = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  Eigen::Vector3d axis(nd(rng), nd(rng), nd(rng));
  const Eigen::Matrix3d R = Eigen::AngleAxisd(nd(rng), axis.normalized()).toRotationMatrix();
  const QuaternionTriple st = standard_triple(n);
  QuaternionTriple t;
  for (int s = 0; s < 3; ++s) {
    RowMatrix m = RowMatrix::Zero(d, d);
    for (int r = 0; r < 3; ++r) m += R(r, s) * st[r].mat();
    t[s] = EndoMatrix(n, O * m * O.transpose());
  }
  return t;
}

EndoMatrix random_endo(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  EndoMatrix e(n);
  for (auto& v : e.data()) v = nd(rng);
  return e;
}

void criterion_algebra() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int n : {1, 2}) {
    for (int seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(kSeed + 1000 * n + seed);
      const QuaternionTriple t = random_triple(n, rng);
      const EndoMatrix psi = random_endo(n, rng);
      worst = std::max(worst, quaternion_residual(t));
      const FourPartSplit parts = four_part_decompose(psi, t);
      worst = std::max(worst, (parts.p_ppp + parts.p_pmm + parts.p_mpm + parts.p_mmp - psi).max_abs());
      worst = std::max(worst, four_part_sign_residual(parts, t));
      const std::vector<std::function<EndoMatrix(const EndoMatrix&)>> projectors = {
          [&](const EndoMatrix& e) { return sp1_part(e, t); },
          [&](const EndoMatrix& e) { return project_P(e, t); },
          [&](const EndoMatrix& e) { return project_torsion_space(e, t); },
      };
      for (const auto& p : projectors) {
        const EndoMatrix once = p(psi);
        worst = std::max(worst, (p(once) - once).max_abs());
        worst = std::max(worst, std::abs(endo_inner(once, psi - once)));
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "algebra exactness", worst <= kAlgebraTol && secs < kAlgebraSeconds,
         fmt("max residual %.3g (tol 1e-12), ", worst) + fmt("%.2f s (limit 5 s)", secs));
}

struct FlatResult {
  double bi1 = 0.0;
  double t0 = 0.0;
  double u = 0.0;
  double scal = 0.0;
  double slots = 0.0;
  int normal = 0;
  int total = 0;
  double secs = 0.0;
  bool errors = false;
};

// bi1, torsion, scalar curvature and the L_chi G slots at one twistor point per base point.
FlatResult flat_zero_set(const QCChart& chart, int count) {
  const auto t0 = Clock::now();
  FlatResult r;
  const auto pts = chart.sample_points(count, kSeed);
  const auto xs = fibonacci_sphere(count, kSeed);
  for (int i = 0; i < count; ++i) {
    try {
      const CurvatureField cf(chart, pts[i]);
      const CurvatureAtPoint cp = cf.at(pts[i], true);
      r.bi1 = std::max(r.bi1, cp.frame().bi1_residual);
      r.t0 = std::max(r.t0, cp.conn.tensors.T0_norm());
      r.u = std::max(r.u, cp.conn.tensors.U_norm());
      r.scal = std::max(r.scal, std::abs(cp.scal));
      const TwistorReport rep = lie_chi_G(cp, xs[i]);
      r.slots = std::max(r.slots, rep.LchiG_D.cwiseAbs().maxCoeff());
      if (rep.verdict == Verdict::normal) ++r.normal;
    } catch (const Error&) {
      r.errors = true;
    }
    ++r.total;
  }
  r.secs = seconds_since(t0);
  return r;
}

bool flat_ok(const FlatResult& r) {
  return !r.errors && r.bi1 <= kBi1Tol && r.t0 <= kFlatTensorTol && r.u <= kFlatTensorTol && r.scal <= kFlatScalTol &&
         r.slots <= kSlotTol && r.normal == r.total;
}

std::string flat_detail(const FlatResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "bi1 %.2g, |T0| %.2g, |U| %.2g, |Scal| %.2g, slots %.2g, normal %d/%d, %.1f s", r.bi1,
                r.t0, r.u, r.scal, r.slots, r.normal, r.total, r.secs);
  return buf;
}

void criterion_flat() {
  const FlatResult r = flat_zero_set(heisenberg(1), kPoints);
  report(2, "flat-model zero set", flat_ok(r) && r.secs < kFlatSeconds, flat_detail(r));
}

// Oracle deviations shared by criteria 3 and 4.
double deformed_oracle_max = 0.0;

void criterion_only_if() {
  const QCChart chart = catalog_chart("heisenberg-1-exp");
  const auto pts = chart.sample_points(kPoints, kSeed);
  const auto xs = fibonacci_sphere(kPoints, kSeed + 1);
  int both = 0;
  double hh = 0.0;
  double min_t0 = 1e300;
  double min_res = 1e300;
  bool errors = false;
  for (int i = 0; i < kPoints; ++i) {
    try {
      const CurvatureField cf(chart, pts[i]);
      const CurvatureAtPoint cp = cf.at(pts[i], true);
      const TwistorReport rep = lie_chi_G(cp, xs[i]);
      min_t0 = std::min(min_t0, rep.T0_norm);
      min_res = std::min(min_res, rep.normality_residual);
      if (rep.T0_norm >= kDeformedT0Min && rep.normality_residual >= kDeformedResidualMin) ++both;
      const OracleResult o = normality_direct_oracle(cf, rep, kOraclePairs, kSeed + i);
      hh = std::max(hh, o.hh_deviation);
      deformed_oracle_max = std::max({deformed_oracle_max, o.matrix_deviation, o.pair_deviation});
    } catch (const Error&) {
      errors = true;
    }
  }
  const bool ok = !errors && both >= kDeformedFraction * kPoints && hh <= kHHTol;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d/%d points with |T0| >= 1e-4 and residual >= 1e-3 (min %.3g, %.3g), HH %.2g",
                both, kPoints, min_t0, min_res, hh);
  report(3, "normality only-if direction", ok, buf);
}

void criterion_oracle() {
  const QCChart chart = heisenberg(1);
  const auto pts = chart.sample_points(kPoints, kSeed + 2);
  const auto xs = fibonacci_sphere(kPoints, kSeed + 3);
  double flat = 0.0;
  bool errors = false;
  for (int i = 0; i < kPoints; ++i) {
    try {
      const CurvatureField cf(chart, pts[i]);
      const CurvatureAtPoint cp = cf.at(pts[i], true);
      const TwistorReport rep = lie_chi_G(cp, xs[i]);
      const OracleResult o = normality_direct_oracle(cf, rep, kOraclePairs, kSeed + i);
      flat = std::max({flat, o.matrix_deviation, o.pair_deviation});
    } catch (const Error&) {
      errors = true;
    }
  }
  const bool ok = !errors && flat <= kOracleTol && deformed_oracle_max <= kOracleTol;
  report(4, "independent oracle agreement", ok,
         fmt("flat %.3g, ", flat) + fmt("deformed %.3g (tol 1e-4)", deformed_oracle_max));
}

std::vector<QCChart> catalog_with_sphere() {
  std::vector<QCChart> charts;
  for (const auto& e : catalog_entries()) charts.push_back(catalog_chart(e.name));
  charts.push_back(conformal(heisenberg(1), spherical_factor(1), "spherical-1"));
  return charts;
}

struct TensorResult {
  double ricci = 0.0;
  double propt = 0.0;
  double newtor = 0.0;
  double trace_free = 0.0;
  double u_n1 = 0.0;
  bool errors = false;
};

TensorResult tensor_checks(const QCChart& chart, int count) {
  TensorResult r;
  for (const auto& u : chart.sample_points(count, kSeed + 4)) {
    try {
      const CurvatureField cf(chart, u);
      const CurvatureAtPoint cp = cf.at(u);
      const ConnectionAtPoint& c = cp.conn;
      r.ricci = std::max(r.ricci, ricci_components_residual(cp));
      r.propt = std::max({r.propt, c.tensors.propt_T0, c.tensors.propt_U});
      r.newtor = std::max(r.newtor, c.newtor);
      r.trace_free = std::max({r.trace_free, c.trace_free, c.tensors.traces});
      if (chart.n() == 1) r.u_n1 = std::max(r.u_n1, c.tensors.U_norm());
    } catch (const Error&) {
      r.errors = true;
    }
  }
  return r;
}

bool torsion_ok(const TensorResult& r) {
  return !r.errors && r.propt <= kTorsionTol && r.newtor <= kTorsionTol && r.trace_free <= kTorsionTol &&
         r.u_n1 <= kUTensorTol;
}

void criteria_ricci_and_torsion() {
  TensorResult all;
  int charts = 0;
  for (const auto& chart : catalog_with_sphere()) {
    const TensorResult r = tensor_checks(chart, kPoints);
    all.ricci = std::max(all.ricci, r.ricci);
    all.propt = std::max(all.propt, r.propt);
    all.newtor = std::max(all.newtor, r.newtor);
    all.trace_free = std::max(all.trace_free, r.trace_free);
    all.u_n1 = std::max(all.u_n1, r.u_n1);
    all.errors = all.errors || r.errors;
    ++charts;
  }
  report(5, "Ricci decomposition", !all.errors && all.ricci <= kRicciTol,
         fmt("max slot residual %.3g over %.0f charts (tol 1e-4)", all.ricci, charts));
  char buf[256];
  std::snprintf(buf, sizeof buf, "propt %.2g, newtor %.2g, traces %.2g (tol 1e-7), n=1 u %.2g (tol 1e-8)", all.propt,
                all.newtor, all.trace_free, all.u_n1);
  report(6, "structural torsion identities", torsion_ok(all), buf);
}

void criteria_twistor() {
  double phi2 = 0.0, gcomp = 0.0, deta = 0.0, deta_fd = 0.0, xi23 = 0.0;
  double cr_flat = 0.0, cr_def = 0.0, levi = 0.0;
  bool errors = false;
  const std::vector<QCChart> charts = {heisenberg(1), catalog_chart("heisenberg-1-exp"),
                                       conformal(heisenberg(1), spherical_factor(1), "spherical-1")};
  for (std::size_t k = 0; k < charts.size(); ++k) {
    const auto pts = charts[k].sample_points(5, kSeed + 5);
    const auto xs = fibonacci_sphere(5, kSeed + 6);
    for (int i = 0; i < 5; ++i) {
      try {
        const CurvatureField cf(charts[k], pts[i]);
        const CurvatureAtPoint cp = cf.at(pts[i]);
        const TwistorPoint tp = TwistorPoint::make(pts[i], xs[i]);
        const ContactIdentities ci = contact_identities(TwistorContext::from(cp.frame(), tp.x, cp.tau));
        phi2 = std::max(phi2, ci.phi_square);
        gcomp = std::max({gcomp, ci.g_compatible, ci.g_chi});
        deta = std::max(deta, ci.deta_g);
        const DEtaOracle de = d_eta_Z_oracle(cf, tp, cp.tau);
        deta_fd = std::max({deta_fd, de.deviation, de.chi_slot});
        xi23 = std::max(xi23, std::abs(de.xi23 + 2.0 * cp.tau));
        if (k < 2) {
          const CRCheck cr = cr_nijenhuis_residual(cf, tp, kOraclePairs, kSeed + i);
          (k == 0 ? cr_flat : cr_def) = std::max(k == 0 ? cr_flat : cr_def, cr.nijenhuis);
          levi = std::max(levi, cr.levi_invariance);
        }
      } catch (const Error&) {
        errors = true;
      }
    }
  }
  const bool ok7 = !errors && phi2 <= kPhiSquareTol && gcomp <= kContactTol && deta <= kContactTol &&
                   deta_fd <= kDEtaTol && xi23 <= kDEtaTol;
  char buf[256];
  std::snprintf(buf, sizeof buf, "Phi^2 %.2g, G(Phi,Phi) %.2g, deta-G %.2g, deta FD %.2g, -2tau term %.2g", phi2, gcomp,
                deta, deta_fd, xi23);
  report(7, "twistor contact-metric identities", ok7, buf);
  std::snprintf(buf, sizeof buf, "N^CR flat %.2g, deformed %.2g (tol 1e-4), Levi J-invariance %.2g (tol 1e-5)",
                cr_flat, cr_def, levi);
  report(8, "CR integrability", !errors && cr_flat <= kCRTol && cr_def <= kCRTol && levi <= kLeviInvTol, buf);
}

void criterion_mte() {
  double worst = 0.0;
  int evaluated = 0;
  bool errors = false;
  for (const QCChart& chart : {heisenberg(1), conformal(heisenberg(1), spherical_factor(1), "spherical-1")}) {
    const auto pts = chart.sample_points(kPoints / 2, kSeed + 7);
    const auto xs = fibonacci_sphere(kPoints / 2, kSeed + 8);
    for (int i = 0; i < kPoints / 2; ++i) {
      try {
        const CurvatureField cf(chart, pts[i]);
        const CurvatureAtPoint cp = cf.at(pts[i], true);
        const TwistorReport rep = lie_chi_G(cp, xs[i]);
        worst = std::max({worst, rep.mte2, rep.mte3, rep.mte4});
        ++evaluated;
      } catch (const Error&) {
        errors = true;
      }
    }
  }
  report(9, "MTE system on T0 = 0 charts", !errors && worst <= kMTETol,
         fmt("max residual %.3g at %.0f twistor points (tol 1e-4)", worst, evaluated));
}

void criterion_commutation() {
  double normal_violation = 0.0;
  bool errors = false;
  for (const QCChart& chart : {heisenberg(1), conformal(heisenberg(1), spherical_factor(1), "spherical-1")}) {
    for (const auto& u : chart.sample_points(kPoints / 2, kSeed + 9)) {
      try {
        const CurvatureAtPoint cp = CurvatureField(chart, u).at(u);
        normal_violation = std::max(normal_violation, ricci_commutation(cp).violation);
      } catch (const Error&) {
        errors = true;
      }
    }
  }
  const QCChart deformed = catalog_chart("heisenberg-1-exp");
  int violated = 0;
  double min_violation = 1e300;
  for (const auto& u : deformed.sample_points(kPoints / 2, kSeed + 9)) {
    try {
      const CurvatureAtPoint cp = CurvatureField(deformed, u).at(u);
      const double v = ricci_commutation(cp).violation;
      min_violation = std::min(min_violation, v);
      if (v >= kCommuteViolationMin) ++violated;
    } catch (const Error&) {
      errors = true;
    }
  }
  const bool ok = !errors && normal_violation <= kCommuteTol && violated >= kDeformedFraction * (kPoints / 2);
  char buf[256];
  std::snprintf(buf, sizeof buf, "T0 = 0 charts %.2g (tol 1e-4), deformed >= 1e-3 at %d/%d points (min %.3g)",
                normal_violation, violated, kPoints / 2, min_violation);
  report(10, "Ric(IX, IY) = Ric(X, Y)", ok, buf);
}

void criterion_smoke(Clock::time_point suite_start) {
  const QCChart chart = heisenberg(2);
  const FlatResult flat = flat_zero_set(chart, kSmokePoints);
  const TensorResult t = tensor_checks(chart, kSmokePoints);
  const double secs = seconds_since(suite_start);
  const bool ok = flat_ok(flat) && !t.errors && t.ricci <= kRicciTol && torsion_ok(t) && secs < kSuiteSeconds;
  char buf[384];
  std::snprintf(buf, sizeof buf, "%s; Ricci %.2g, torsion %.2g; suite %.1f s (limit 300 s)", flat_detail(flat).c_str(),
                t.ricci, std::max({t.propt, t.newtor, t.trace_free}), secs);
  report(11, "n = 2 smoke", ok, buf);
}

}  // namespace

int main() {
  const auto start = Clock::now();
  criterion_algebra();
  criterion_flat();
  criterion_only_if();
  criterion_oracle();
  criteria_ricci_and_torsion();
  criteria_twistor();
  criterion_mte();
  criterion_commutation();
  criterion_smoke(start);
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
