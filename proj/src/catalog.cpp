#include "qclab/catalog.hpp"

#include <functional>

namespace qclab {

Eigen::MatrixXd heisenberg_J(int n, int s) {
  return -standard_triple(n)[s].mat();
}

QCChart heisenberg(int n) {
  if (n != 1 && n != 2) fail(ErrorKind::UnsupportedDimension, "heisenberg(n) is available for n = 1, 2");
  const int m = 4 * n + 3;
  const int k = 4 * n;
  std::vector<std::string> coords;
  for (int a = 1; a <= k; ++a) coords.push_back("x" + std::to_string(a));
  for (int s = 1; s <= 3; ++s) coords.push_back("t" + std::to_string(s));

  CoeffTable coeffs;
  for (int s = 0; s < 3; ++s) {
    const Eigen::MatrixXd J = heisenberg_J(n, s);
    for (int b = 0; b < m; ++b) {
      std::string text;
      if (b < k) {
        // coefficient of dx^b is sum_a J_{ab} x^a
        for (int a = 0; a < k; ++a) {
          const double v = J(a, b);
          if (v == 0.0) continue;
          const std::string var = "x" + std::to_string(a + 1);
          if (text.empty()) text = (v > 0 ? "" : "-") + var;
          else text += (v > 0 ? " + " : " - ") + var;
        }
        if (text.empty()) text = "0";
      } else {
        text = (b - k == s) ? "0.5" : "0";
      }
      coeffs[s].push_back(expr::parse(text, m, coords));
    }
  }
  QCChart c("heisenberg-" + std::to_string(n), n, coords, std::move(coeffs));
  c.set_description("flat quaternionic Heisenberg group, dimension " + std::to_string(m));
  return c;
}

QCChart conformal(const QCChart& base, const expr::Expr& mu, std::string name) {
  if (mu.dimension() != base.m()) fail(ErrorKind::SizeMismatch, "conformal factor dimension mismatch");
  std::optional<expr::Expr> factor = base.factor() ? std::optional<expr::Expr>((*base.factor()) * mu) : mu;
  if (name.empty()) name = base.name() + "-conformal";
  QCChart c(std::move(name), base.n(), base.coords(), base.base_coeffs(), factor, base.domain());
  c.set_sampling(base.samples(), base.seed());
  auto pts = c.sample_points(c.samples(), c.seed());
  pts.push_back(c.origin());
  for (const auto& p : pts) {
    double v = 0.0;
    try {
      v = factor->eval(p);
    } catch (const Error&) {
      v = 0.0;
    }
    if (!(v > 0.0)) fail(ErrorKind::NonPositiveFactor, "conformal factor is not positive at a sample point");
  }
  return c;
}

QCChart conformal(const QCChart& base, const std::string& mu_text, std::string name) {
  return conformal(base, expr::parse(mu_text, base.m(), base.coords()), std::move(name));
}

std::string spherical_factor(int n) {
  std::string r;
  for (int a = 1; a <= 4 * n; ++a) r += (a > 1 ? " + x" : "x") + std::to_string(a) + "^2";
  return "1/((1 + " + r + ")^2 + t1^2 + t2^2 + t3^2)";
}

namespace {

struct Builtin {
  CatalogEntry entry;
  std::function<QCChart()> make;
};

const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> list = {
      {{"heisenberg-1", 1, "flat quaternionic Heisenberg group, dimension 7"}, [] { return heisenberg(1); }},
      {{"heisenberg-2", 2, "flat quaternionic Heisenberg group, dimension 11"}, [] { return heisenberg(2); }},
      {{"heisenberg-1-homothety", 1, "heisenberg-1 scaled by the constant 2"},
       [] { return conformal(heisenberg(1), "2", "heisenberg-1-homothety"); }},
      {{"heisenberg-1-exp", 1, "heisenberg-1 with conformal factor exp(0.2*x1)"},
       [] { return conformal(heisenberg(1), "exp(0.2*x1)", "heisenberg-1-exp"); }},
      {{"heisenberg-2-exp", 2, "heisenberg-2 with conformal factor exp(0.2*x1)"},
       [] { return conformal(heisenberg(2), "exp(0.2*x1)", "heisenberg-2-exp"); }},
      {{"heisenberg-1-mixed", 1, "heisenberg-1 with conformal factor exp(0.2*x1 + 0.3*t1)"},
       [] { return conformal(heisenberg(1), "exp(0.2*x1 + 0.3*t1)", "heisenberg-1-mixed"); }},
  };
  return list;
}

}  // namespace

std::vector<CatalogEntry> catalog_entries() {
  std::vector<CatalogEntry> out;
  for (const auto& b : builtins()) out.push_back(b.entry);
  return out;
}

QCChart catalog_chart(const std::string& name) {
  for (const auto& b : builtins()) {
    if (b.entry.name == name) {
      QCChart c = b.make();
      c.set_description(b.entry.description);
      return c;
    }
  }
  fail(ErrorKind::SchemaError, "unknown catalog chart '" + name + "'");
}

}  // namespace qclab
