#pragma once

#include <string>
#include <vector>

#include "qclab/chart.hpp"

namespace qclab {

// Quaternionic Heisenberg group of dimension 4n+3 (n = 1, 2), coordinates
// x1..x4n, t1..t3, coframe eta_s = 1/2 dt_s + sum_{a,b} (J_s)_{ab} x^a dx^b
// with J_s = -(left multiplication by i, j, k). Reeb fields are 2 d/dt_s.
QCChart heisenberg(int n);

// The 4n x 4n matrix J_s used by heisenberg(n).
Eigen::MatrixXd heisenberg_J(int n, int s);

// mu * eta. Throws NonPositiveFactor unless mu > 0 at the chart's sample points and origin.
QCChart conformal(const QCChart& base, const expr::Expr& mu, std::string name = {});
QCChart conformal(const QCChart& base, const std::string& mu_text, std::string name = {});

// 1 / ((1 + |x|^2)^2 + |t|^2): the conformally flat factor for which heisenberg(n)
// becomes a structure with T0 = U = 0 and tau = 4 (checked numerically in the tests).
std::string spherical_factor(int n);

struct CatalogEntry {
  std::string name;
  int n = 0;
  std::string description;
};

std::vector<CatalogEntry> catalog_entries();
// Throws SchemaError for unknown names.
QCChart catalog_chart(const std::string& name);

}  // namespace qclab
