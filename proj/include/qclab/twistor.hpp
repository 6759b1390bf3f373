#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "qclab/curvature.hpp"

// Twistor space Z = unit sphere bundle of Q at a point (p, I), I = sum x_s I_s.
// Tangent vectors are split as X_H (horizontal lift of H), X_V (horizontal lift of V)
// and a vertical part a tangent to the fibre, all in the unrotated frame at p.

namespace qclab {

struct TwistorPoint {
  std::vector<double> u;
  VTriple x{1.0, 0.0, 0.0};

  // Normalizes x; throws SizeMismatch for a zero vector.
  static TwistorPoint make(std::vector<double> u, const VTriple& x);
};

struct TwistorTangent {
  Eigen::VectorXd baseH;  // 4n components in eH
  VTriple baseV{};        // components in xi
  VTriple vert{};         // coefficients in I_s, orthogonal to x
};

// Rotation R in SO(3) with R e1 = x; columns are the rotated directions, so
// xi'_s = sum_t R(t, s) xi_t and I'_s = sum_t R(t, s) I_t.
Eigen::Matrix3d gauge_rotation(const VTriple& x);
PointFrame gauge_rotate(const PointFrame& fr, const VTriple& x);

// max over s <= t of |d eta_s(xi_t, X) + d eta_t(xi_s, X)| on H, from the frame's own jet.
double biquard_residual(const PointFrame& fr);

// Pointwise data needed by the closed forms.
struct TwistorContext {
  int n = 0;
  VTriple x{1.0, 0.0, 0.0};
  EndoMatrix I;     // sum x_s I_s
  double tau = 0.0;

  static TwistorContext from(const PointFrame& fr, const VTriple& x, double tau);
  int dim() const { return 4 * n + 5; }
  TwistorTangent zero() const;
  TwistorTangent chi() const;
  // Basis of TZ: e_a lifts, xi_s lifts, then the vertical directions I'_2, I'_3.
  std::vector<TwistorTangent> tangent_basis() const;
  // Basis of D = ker eta^Z: e_a lifts, xi'_2, xi'_3 lifts, I'_2, I'_3.
  std::vector<TwistorTangent> d_basis() const;
};

double eta_Z(const TwistorContext& c, const TwistorTangent& t);
TwistorTangent phi(const TwistorContext& c, const TwistorTangent& t);
// Closed forms for G and d eta^Z.
double metric_G(const TwistorContext& c, const TwistorTangent& a, const TwistorTangent& b);
double d_eta_Z(const TwistorContext& c, const TwistorTangent& a, const TwistorTangent& b);
// G(A, B) = d eta^Z(A, Phi B) / 2 + eta^Z(A) eta^Z(B).
double metric_G_from_definition(const TwistorContext& c, const TwistorTangent& a, const TwistorTangent& b);

TwistorTangent operator+(const TwistorTangent& a, const TwistorTangent& b);
TwistorTangent operator*(double s, const TwistorTangent& a);
double max_abs_diff(const TwistorTangent& a, const TwistorTangent& b);

// Contact-metric identities over all pairs of tangent_basis():
// Phi^2 = -Id + eta^Z (x) chi, G(Phi A, Phi B) = G(A, B) - eta^Z(A) eta^Z(B),
// d eta^Z(A, B) = 2 G(Phi A, B), and the closed G against its definition.
struct ContactIdentities {
  double phi_square = 0.0;
  double g_compatible = 0.0;
  double deta_g = 0.0;
  double g_definition = 0.0;
  double g_chi = 0.0;   // |G(chi, chi) - 1| and |G(A, chi)| for A in D
};
ContactIdentities contact_identities(const TwistorContext& c);

struct Signature {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};
Signature metric_signature(const TwistorContext& c, double zero_tol = 1e-9);

enum class Verdict { normal, not_normal, inconclusive };
std::string_view verdict_name(Verdict v);
Verdict normality_verdict(double residual, double t0_norm, const Tolerances& tol);

struct TwistorReport {
  TwistorPoint tp;
  Eigen::Matrix3d rotation;
  double tau = 0.0;
  RowMatrix LchiG_HH;          // 2 g(T0_{xi'_1} e_a, e_b)
  Eigen::MatrixXd LchiG_HV;    // (a, s - 2), s = 2, 3
  Eigen::Matrix2d LchiG_VV;
  Eigen::MatrixXd LchiG_D;     // full form on d_basis(), zeros in the vertical slots
  double normality_residual = 0.0;
  double T0_norm = 0.0;
  double mte2 = 0.0;
  double mte3 = 0.0;
  double mte4 = 0.0;
  Verdict verdict = Verdict::inconclusive;
};

// cp must carry d tau (CurvatureField::at with with_dtau).
TwistorReport lie_chi_G(const CurvatureAtPoint& cp, const VTriple& x, const Tolerances& tol = {});

// count points on S^2, golden-angle spiral rotated by a seed-determined rotation.
std::vector<VTriple> fibonacci_sphere(int count, std::uint64_t seed);

// Independent finite-difference computations on Z~ = M x (R^3 \ 0), using the
// horizontal lift with connection coefficients <nabla_X I_s, I_t> and the
// pullback of G along the radial projection.
struct OracleResult {
  Eigen::MatrixXd direct;     // L_chi G on d_basis() by differencing
  Eigen::MatrixXd closed;     // lie_chi_G
  double matrix_deviation = 0.0;
  double pair_deviation = 0.0;  // over random pairs in D
  double hh_deviation = 0.0;    // HH block against 2 g(T0_{xi'_1}., .)
  double vertical_max = 0.0;    // direct values on (a, b) pairs
  double direct_max = 0.0;
};
OracleResult normality_direct_oracle(const CurvatureField& cf, const TwistorReport& report, int sample_pairs,
                                     std::uint64_t seed);

struct DEtaOracle {
  Eigen::MatrixXd direct;     // d eta^Z on tangent_basis() by differencing
  Eigen::MatrixXd closed;
  double deviation = 0.0;
  double xi23 = 0.0;          // direct d eta^Z(xi'_2, xi'_3), expected -2 tau
  double chi_slot = 0.0;      // max |d eta^Z(A, chi)| from the direct computation
};
DEtaOracle d_eta_Z_oracle(const CurvatureField& cf, const TwistorPoint& tp, double tau);

struct CRCheck {
  double nijenhuis = 0.0;         // max D-component of N^CR over sampled pairs
  double levi_invariance = 0.0;   // max |d eta^Z(JA, JB) - d eta^Z(A, B)| on D
};
// flip_vertical replaces J on the fibre by its negative (negative control).
CRCheck cr_nijenhuis_residual(const CurvatureField& cf, const TwistorPoint& tp, int sample_pairs, std::uint64_t seed,
                              bool flip_vertical = false);

}  // namespace qclab
