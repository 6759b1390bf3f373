#include "qclab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>

namespace qclab {

int default_threads() {
  if (const char* env = std::getenv("QCLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

namespace {

std::string describe(const Error& e) { return std::string(error_kind_name(e.kind())) + ": " + e.what(); }

// Fibre points for base point i; seeded per point so row content does not
// depend on the order of evaluation.
std::vector<VTriple> fibre_points(const RunSpec& spec, int i) {
  return fibonacci_sphere(spec.fiber, spec.seed * 1000003ULL + static_cast<std::uint64_t>(i));
}

double connection_max(const ConnectionAtPoint& c) {
  return std::max({c.horizontal.metricity, c.horizontal.torsion, c.vertical.q_residual, c.xi.q_residual_H,
                   c.xi.phi_transfer, c.xi.v_metricity});
}

double torsion_max(const ConnectionAtPoint& c) {
  const TorsionTensors& t = c.tensors;
  return std::max({c.split.max(), t.propt_T0, t.propt_U, t.traces, t.symmetry, t.newequiv, c.newtor, c.trace_free,
                   c.torsion_space});
}

}  // namespace

std::vector<InvariantRow> run_invariants(const RunSpec& spec) {
  const int count = static_cast<int>(spec.points.size());
  return parallel_map<InvariantRow>(count, spec.threads, [&](int i) {
    InvariantRow row;
    row.index = i;
    row.u = spec.points[i];
    try {
      const CurvatureField cf(spec.chart, row.u, spec.settings);
      const CurvatureAtPoint cp = cf.at(row.u, false, true);
      row.T0_norm = cp.conn.tensors.T0_norm();
      row.U_norm = cp.conn.tensors.U_norm();
      row.scal = cp.scal;
      row.tau = cp.tau;
      row.ricci_residual = ricci_components_residual(cp);
      row.alpha_residual = alpha_identity_check(cp);
      row.connection_residual = connection_max(cp.conn);
      row.torsion_residual = torsion_max(cp.conn);
    } catch (const Error& e) {
      row.error = describe(e);
    }
    return row;
  });
}

std::vector<NormalityRow> run_normality(const RunSpec& spec) {
  const int count = static_cast<int>(spec.points.size());
  const auto per_point = parallel_map<std::vector<NormalityRow>>(count, spec.threads, [&](int i) {
    std::vector<NormalityRow> rows;
    const std::vector<VTriple> xs = fibre_points(spec, i);
    auto base_row = [&](int f) {
      NormalityRow r;
      r.point = i;
      r.fiber = f;
      r.u = spec.points[i];
      r.x = xs[f];
      return r;
    };
    try {
      const CurvatureField cf(spec.chart, spec.points[i], spec.settings);
      const CurvatureAtPoint cp = cf.at(spec.points[i], true, true);
      for (int f = 0; f < spec.fiber; ++f) {
        NormalityRow r = base_row(f);
        const TwistorReport rep = lie_chi_G(cp, xs[f], spec.settings.tol);
        r.x = rep.tp.x;
        r.T0_norm = rep.T0_norm;
        r.U_norm = cp.conn.tensors.U_norm();
        r.scal = cp.scal;
        r.tau = cp.tau;
        r.residual = rep.normality_residual;
        r.mte = std::max({rep.mte2, rep.mte3, rep.mte4});
        r.verdict = rep.verdict;
        r.signature = metric_signature(TwistorContext::from(cp.frame(), rep.tp.x, cp.tau));
        if (spec.oracle) {
          r.oracle_deviation = normality_direct_oracle(cf, rep, 20, spec.seed + static_cast<std::uint64_t>(f))
                                   .matrix_deviation;
        }
        rows.push_back(std::move(r));
      }
    } catch (const Error& e) {
      rows.clear();
      for (int f = 0; f < spec.fiber; ++f) {
        NormalityRow r = base_row(f);
        r.error = describe(e);
        rows.push_back(std::move(r));
      }
    }
    return rows;
  });
  std::vector<NormalityRow> out;
  for (const auto& rows : per_point)
    for (const auto& r : rows) {
      out.push_back(r);
      out.back().index = static_cast<int>(out.size()) - 1;
    }
  return out;
}

Verdict summary_verdict(const std::vector<NormalityRow>& rows) {
  bool all_normal = !rows.empty();
  for (const auto& r : rows) {
    if (!r.error.empty()) return Verdict::inconclusive;
    if (r.verdict == Verdict::not_normal) return Verdict::not_normal;
    if (r.verdict != Verdict::normal) all_normal = false;
  }
  return all_normal ? Verdict::normal : Verdict::inconclusive;
}

std::string_view check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "skipped";
}

bool IdentityReport::ok() const {
  if (!errors.empty()) return false;
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::fail; });
}

IdentityReport run_identities(const RunSpec& spec) {
  const Tolerances& tol = spec.settings.tol;
  const int n = spec.chart.n();
  // Check names in report order with their tolerances.
  const std::vector<std::pair<std::string, double>> table = {
      {"frame", tol.frame},
      {"bi1", tol.biquard},
      {"connection_metricity", tol.connection},
      {"connection_torsion", tol.connection},
      {"q_preservation", tol.connection},
      {"phi_transfer", tol.connection},
      {"torsion_split", tol.torsion},
      {"propt", tol.torsion},
      {"tensors_trace_symmetry", tol.torsion},
      {"newequiv", tol.torsion},
      {"newtor", tol.torsion},
      {"trace_free", tol.torsion},
      {"u_tensor_n1", tol.u_tensor_n1},
      {"curvature_symmetries", tol.curvature},
      {"ricci_components", tol.ricci},
      {"alpha", tol.alpha},
      {"ricci_commutation", tol.ricci},
      {"phi_square", tol.algebra},
      {"g_compatible", tol.structure},
      {"deta_g", tol.structure},
      {"g_definition", tol.structure},
      {"deta_oracle", tol.alpha},
      {"cr_nijenhuis", tol.cr},
      {"levi_invariance", tol.levi_invariance},
      {"mte", tol.oracle},
      {"theorem_consistency", 0.0},
      {"normality_oracle", tol.oracle},
  };
  using Values = std::map<std::string, std::vector<double>>;
  struct PointOut {
    Values values;
    std::string error;
  };

  const int count = static_cast<int>(spec.points.size());
  const auto outs = parallel_map<PointOut>(count, spec.threads, [&](int i) {
    PointOut po;
    auto put = [&](const std::string& name, double v) { po.values[name].push_back(v); };
    const std::vector<double>& u = spec.points[i];
    const PointValidation pv = validate_point(spec.chart, u, spec.settings);
    if (!pv.ok) {
      // The failing invariant is reported under its own check; everything
      // downstream of the frame is skipped at this point.
      const bool reeb = pv.error_kind == error_kind_name(ErrorKind::BiquardConditionFail) ||
                        pv.error_kind == error_kind_name(ErrorKind::IllConditioned);
      if (reeb) {
        put("bi1", pv.bi1);
      } else {
        put("frame", std::numeric_limits<double>::infinity());
      }
      po.error = "point " + std::to_string(i) + ": " + pv.error_kind + ": " + pv.message;
      return po;
    }
    put("frame", pv.check.max());
    put("bi1", pv.bi1);
    try {
      const CurvatureField cf(spec.chart, u, spec.settings);
      const CurvatureAtPoint cp = cf.at(u, true, true);
      const ConnectionAtPoint& c = cp.conn;
      put("connection_metricity", std::max(c.horizontal.metricity, c.xi.v_metricity));
      put("connection_torsion", c.horizontal.torsion);
      put("q_preservation", std::max(c.vertical.q_residual, c.xi.q_residual_H));
      put("phi_transfer", c.xi.phi_transfer);
      put("torsion_split", c.split.max());
      put("propt", std::max(c.tensors.propt_T0, c.tensors.propt_U));
      put("tensors_trace_symmetry", std::max(c.tensors.traces, c.tensors.symmetry));
      put("newequiv", c.tensors.newequiv);
      put("newtor", c.newtor);
      put("trace_free", std::max(c.trace_free, c.torsion_space));
      if (n == 1) put("u_tensor_n1", c.tensors.U_norm());
      put("curvature_symmetries", std::max({cp.antisymmetry, cp.metricity, cp.ric_symmetry}));
      put("ricci_components", ricci_components_residual(cp));
      put("alpha", alpha_identity_check(cp));
      put("ricci_commutation", ricci_commutation(cp).agreement);

      const std::vector<VTriple> xs = fibre_points(spec, i);
      for (int f = 0; f < spec.fiber; ++f) {
        const TwistorReport rep = lie_chi_G(cp, xs[f], tol);
        const TwistorContext ctx = TwistorContext::from(cp.frame(), rep.tp.x, cp.tau);
        const ContactIdentities ci = contact_identities(ctx);
        put("phi_square", ci.phi_square);
        put("g_compatible", std::max(ci.g_compatible, ci.g_chi));
        put("deta_g", ci.deta_g);
        put("g_definition", ci.g_definition);
        const DEtaOracle de = d_eta_Z_oracle(cf, rep.tp, cp.tau);
        put("deta_oracle", std::max(de.deviation, de.chi_slot));
        const std::uint64_t pair_seed = spec.seed + static_cast<std::uint64_t>(f);
        const CRCheck cr = cr_nijenhuis_residual(cf, rep.tp, 20, pair_seed);
        put("cr_nijenhuis", cr.nijenhuis);
        put("levi_invariance", cr.levi_invariance);
        if (rep.T0_norm <= tol.t0) put("mte", std::max({rep.mte2, rep.mte3, rep.mte4}));
        // The theorem couples the two: a small T0 with a large residual (or the
        // reverse) outside the guard band is a contradiction.
        const bool small_t0 = rep.T0_norm <= tol.t0;
        const bool large_t0 = rep.T0_norm >= 10.0 * tol.t0;
        const bool contradiction = (small_t0 && rep.normality_residual >= 10.0 * tol.normal) ||
                                   (large_t0 && rep.normality_residual <= tol.normal);
        put("theorem_consistency", contradiction ? 1.0 : 0.0);
        if (spec.oracle) put("normality_oracle", normality_direct_oracle(cf, rep, 20, pair_seed).matrix_deviation);
      }
    } catch (const Error& e) {
      po.error = "point " + std::to_string(i) + ": " + describe(e);
    }
    return po;
  });

  IdentityReport rep;
  for (const auto& po : outs)
    if (!po.error.empty()) rep.errors.push_back(po.error);
  for (const auto& [name, t] : table) {
    CheckResult cr;
    cr.name = name;
    cr.tolerance = t;
    bool failed = false;
    for (const auto& po : outs) {
      auto it = po.values.find(name);
      if (it == po.values.end()) continue;
      for (double v : it->second) {
        ++cr.evaluated;
        if (!(v <= t)) failed = true;
        if (std::isnan(v) || v > cr.value) cr.value = v;
      }
    }
    cr.status = cr.evaluated == 0 ? CheckStatus::skipped : (failed ? CheckStatus::fail : CheckStatus::pass);
    rep.checks.push_back(cr);
  }
  return rep;
}

}  // namespace qclab
