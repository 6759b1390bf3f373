#pragma once

#include <array>
#include <optional>
#include <vector>

#include "qclab/connection.hpp"

// Curvature of the Biquard connection on H by differencing the connection
// matrices Omega_A along the frame:
// R(E_A, E_B) = E_A(Omega_B) - E_B(Omega_A) + [Omega_A, Omega_B] - sum_C c^C_{AB} Omega_C.

namespace qclab {

struct CurvatureAtPoint {
  int n = 0;
  ConnectionAtPoint conn;
  std::vector<std::vector<EndoMatrix>> R;  // R[A][B] = matrix of R(E_A, E_B) on H
  RowMatrix ric;                           // Ric(e_a, e_c) = sum_b g(R(e_b, e_a) e_c, e_b)
  std::array<Eigen::MatrixXd, 3> rho;      // rho[s](A, B) = <R(E_A, E_B), I_s>
  double scal = 0.0;
  double tau = 0.0;
  std::optional<std::array<double, 3>> dtau;  // d tau(xi_s)
  double antisymmetry = 0.0;
  double metricity = 0.0;
  double ric_symmetry = 0.0;

  const PointFrame& frame() const { return conn.frame(); }
  int m() const { return 4 * n + 3; }
};

class CurvatureField {
 public:
  explicit CurvatureField(ConnectionField cf) : cf_(std::move(cf)) {}
  CurvatureField(const QCChart& chart, std::span<const double> anchor, const Settings& settings = {},
                 std::optional<Eigen::MatrixXd> rotation = std::nullopt)
      : cf_(chart, anchor, settings, std::move(rotation)) {}

  // with_dtau adds d tau(xi_s) by differencing tau along xi_s (12 extra curvature evaluations).
  CurvatureAtPoint at(std::span<const double> u, bool with_dtau = false, bool strict = true) const;
  CurvatureAtPoint at(const Eigen::VectorXd& u, bool with_dtau = false, bool strict = true) const {
    return at(std::span<const double>(u.data(), u.size()), with_dtau, strict);
  }
  // Same with an explicit curvature step (step-halving diagnostics).
  CurvatureAtPoint at_step(std::span<const double> u, double h, int order, bool strict = true) const;

  double scal_at(const Eigen::VectorXd& u) const;
  double tau_at(const Eigen::VectorXd& u) const;

  // Max difference of all curvature slots between steps h and h/2.
  // Throws StepTooSmall when it exceeds tol.curvature and throw_on_noise is set.
  double step_halving(std::span<const double> u, bool throw_on_noise = false) const;

  const ConnectionField& connection() const { return cf_; }
  const Settings& settings() const { return cf_.settings(); }

 private:
  CurvatureAtPoint build(std::span<const double> u, double h, int order, bool strict) const;
  ConnectionField cf_;
};

// R(E_A, E_B) restricted to H at u.
EndoMatrix curvature_endo(const CurvatureAtPoint& cp, int A, int B);

inline double tau_from_scal(double scal, int n) { return scal / (16.0 * n * (n + 2)); }

// max over i, s of |alpha_i(xi_s) - [d eta_s(xi_j, xi_k) - delta_is (tau + sum of halves)]|.
// An optional perturbation is added to alpha (negative controls).
double alpha_identity_check(const CurvatureAtPoint& cp, const Eigen::Matrix3d& alpha_perturbation = Eigen::Matrix3d::Zero());

// Slotwise |Ric - ((2n+2) T0 + (4n+10) U + Scal/(4n) g)|.
double ricci_components_residual(const CurvatureAtPoint& cp);

struct RicciCommutation {
  double violation = 0.0;   // max_s |Ric(I_s., I_s.) - Ric|
  double predicted = 0.0;   // max_s (2n+2) |T0(I_s., I_s.) - T0|
  double agreement = 0.0;   // max_s |(Ric(I_s., I_s.) - Ric) - (2n+2)(T0(I_s., I_s.) - T0)|
};
RicciCommutation ricci_commutation(const CurvatureAtPoint& cp);

}  // namespace qclab
