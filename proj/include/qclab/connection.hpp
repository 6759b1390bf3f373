#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "qclab/algebra.hpp"
#include "qclab/chart.hpp"

// Biquard connection at a point, assembled from its defining conditions in the
// adapted frame E_0..E_{m-1} = (e_1..e_4n, xi_1, xi_2, xi_3).

namespace qclab {

// Frame at u together with its coordinate derivatives (central differences)
// and the structure functions [E_A, E_B] = sum_C c^C_{AB} E_C.
struct FrameJet {
  PointFrame frame;
  Eigen::MatrixXd F;                            // [eH | xi]
  std::vector<Eigen::MatrixXd> dF;              // dF[r] = d_r F
  std::array<std::vector<EndoMatrix>, 3> dI;    // dI[s][r] = d_r I_s
  std::vector<Eigen::MatrixXd> c;               // c[C](A, B)

  int n() const { return frame.n; }
  int m() const { return frame.m(); }
  Eigen::VectorXd direction(int A) const { return F.col(A); }
  // Derivative of the matrix field I_s along a coordinate vector v.
  EndoMatrix dI_along(int s, const Eigen::VectorXd& v) const;
  // Frame components of [E_A, E_B].
  Eigen::VectorXd bracket(int A, int B) const;
};

FrameJet frame_jet(const FrameField& ff, std::span<const double> u);

// (Omega_a)_{cb} = g(nabla_{e_a} e_b, e_c) from the Koszul formula.
struct HorizontalPart {
  std::vector<EndoMatrix> omega;  // 4n entries
  double metricity = 0.0;
  double torsion = 0.0;           // nabla_X Y - nabla_Y X - [X,Y]_H
};
HorizontalPart horizontal_partial(const FrameJet& jet);

struct VerticalPart {
  std::array<EndoMatrix, 3> B;  // (B_s)_{ba}: e_b-component of [xi_s, e_a]
  std::array<EndoMatrix, 3> C;  // matrix of nabla_{xi_s} on H
  std::array<EndoMatrix, 3> T;  // torsion endomorphisms T_{xi_s} = C_s - B_s
  int complement_dim = 0;       // dim of skew (P + Q)^perp
  double q_residual = 0.0;      // Q-preservation along xi_s after the solve
};
// Throws QPreservationFail when q_residual exceeds tol.connection (if strict).
VerticalPart vertical_on_H(const FrameJet& jet, const Tolerances& tol = {}, bool strict = true);

struct XiDerivatives {
  std::vector<Eigen::Matrix3d> theta;  // theta[A](t, s) = g(nabla_{E_A} xi_s, xi_t)
  std::vector<Eigen::Matrix3d> q;      // q[A](s, t) = <nabla_{E_A} I_s, I_t>
  Eigen::MatrixXd alpha;               // alpha(k, A) = alpha_k(E_A), 3 x m
  double q_residual_H = 0.0;           // Q-preservation along e_a
  double phi_transfer = 0.0;           // [e_a, xi_s]_V versus phi^{-1}(nabla_{e_a} I_s)
  double v_metricity = 0.0;            // theta skew
};
XiDerivatives xi_derivatives(const FrameJet& jet, const HorizontalPart& hp, const VerticalPart& vp);

struct TorsionSplit {
  std::array<EndoMatrix, 3> T0;  // symmetric parts
  std::array<EndoMatrix, 3> b;   // skew parts
  EndoMatrix u;                  // b_s = I_s u, averaged over s
  double u_spread = 0.0;
  double anticommute = 0.0;      // T0_s I_s + I_s T0_s
  double cross = 0.0;            // the three four-part cross relations
  double u_structure = 0.0;      // u symmetric, traceless, commuting with I_t
  double max() const;
};
// Throws TorsionStructureFail when a residual exceeds tol.torsion (if strict).
TorsionSplit torsion_split(const std::array<EndoMatrix, 3>& T, const QuaternionTriple& I, const Tolerances& tol = {},
                           bool strict = true);

// Matrices of the forms T0(e_a, e_b) and U(e_a, e_b).
struct TorsionTensors {
  RowMatrix T0;
  RowMatrix U;
  double propt_T0 = 0.0;   // T0 + sum_s T0(I_s., I_s.)
  double propt_U = 0.0;    // U - U(I_s., I_s.)
  double traces = 0.0;     // tr T0, tr T0 I_s, tr U, tr U I_s
  double symmetry = 0.0;
  double newequiv = 0.0;   // 4 g(T0_s X, Y) + T0(I_s X, Y) + T0(X, I_s Y)
  double T0_norm() const { return T0.norm(); }
  double U_norm() const { return U.norm(); }
};
TorsionTensors torsion_tensors(const TorsionSplit& split, const QuaternionTriple& I);

// max over s, a, b of |g(T(xi_s, e_a), e_b) - (-(T0(I_s e_a, e_b) + T0(e_a, I_s e_b))/4 + U(I_s e_a, e_b))|
double newtor_check(const std::array<EndoMatrix, 3>& T, const TorsionTensors& tt, const QuaternionTriple& I);

struct ConnectionAtPoint {
  int n = 0;
  FrameJet jet;
  std::vector<EndoMatrix> omega;  // m entries: matrix of nabla_{E_A} on H
  HorizontalPart horizontal;
  VerticalPart vertical;
  XiDerivatives xi;
  TorsionSplit split;
  TorsionTensors tensors;
  double newtor = 0.0;
  double trace_free = 0.0;        // tr T_s, tr T_s I_t
  double torsion_space = 0.0;     // T_s - project_torsion_space(T_s)

  const PointFrame& frame() const { return jet.frame; }
  double gamma(int c, int a, int b) const { return omega[a](c, b); }
  VTriple nabla_xi_along_H(int a, int s) const;
};

class ConnectionField {
 public:
  explicit ConnectionField(FrameField ff) : ff_(std::move(ff)) {}
  ConnectionField(const QCChart& chart, std::span<const double> anchor, const Settings& settings = {},
                  std::optional<Eigen::MatrixXd> rotation = std::nullopt)
      : ff_(chart, anchor, settings, std::move(rotation)) {}

  // strict: throw on failed post-hoc checks; off for neighbour points of a stencil.
  ConnectionAtPoint at(std::span<const double> u, bool strict = true) const;
  ConnectionAtPoint at(const Eigen::VectorXd& u, bool strict = true) const {
    return at(std::span<const double>(u.data(), u.size()), strict);
  }
  // Only the connection matrices Omega_A (cheaper; used by curvature differencing).
  std::vector<EndoMatrix> omega_at(const Eigen::VectorXd& u) const;

  const FrameField& frames() const { return ff_; }
  const Settings& settings() const { return ff_.settings(); }

 private:
  FrameField ff_;
};

}  // namespace qclab
