#include "qclab/curvature.hpp"

#include <algorithm>
#include <cmath>

#include "qclab/diff.hpp"

namespace qclab {

namespace {

Eigen::VectorXd pack_omega(const std::vector<EndoMatrix>& om) {
  const Eigen::Index kk = om[0].mat().size();
  Eigen::VectorXd v(kk * static_cast<Eigen::Index>(om.size()));
  for (std::size_t A = 0; A < om.size(); ++A) {
    v.segment(static_cast<Eigen::Index>(A) * kk, kk) = Eigen::Map<const Eigen::VectorXd>(om[A].mat().data(), kk);
  }
  return v;
}

}  // namespace

CurvatureAtPoint CurvatureField::build(std::span<const double> u, double h, int order, bool strict) const {
  CurvatureAtPoint cp;
  cp.conn = cf_.at(u, strict);
  cp.n = cp.conn.n;
  const int n = cp.n;
  const int k = 4 * n;
  const int m = cp.m();
  const FrameJet& jet = cp.conn.jet;

  const VectorFn f = [this](const Eigen::VectorXd& x) { return pack_omega(cf_.omega_at(x)); };
  const Eigen::MatrixXd J = jacobian(f, to_vector(u), h, order);

  // dOm[A][B] = E_A(Omega_B)
  std::vector<std::vector<EndoMatrix>> dOm(m, std::vector<EndoMatrix>(m));
  for (int A = 0; A < m; ++A) {
    const Eigen::VectorXd d = J * jet.direction(A);
    for (int B = 0; B < m; ++B) {
      RowMatrix blk = Eigen::Map<const RowMatrix>(d.data() + static_cast<Eigen::Index>(B) * k * k, k, k);
      dOm[A][B] = EndoMatrix(n, std::move(blk));
    }
  }

  const std::vector<EndoMatrix>& Om = cp.conn.omega;
  cp.R.assign(m, std::vector<EndoMatrix>(m, EndoMatrix(n)));
  for (int A = 0; A < m; ++A) {
    for (int B = 0; B < m; ++B) {
      if (A == B) continue;
      EndoMatrix r = dOm[A][B] - dOm[B][A] + commutator(Om[A], Om[B]);
      for (int C = 0; C < m; ++C) {
        const double c = jet.c[C](A, B);
        if (c != 0.0) r -= c * Om[C];
      }
      cp.R[A][B] = std::move(r);
    }
  }
  for (int A = 0; A < m; ++A) {
    for (int B = 0; B < m; ++B) {
      cp.antisymmetry = std::max(cp.antisymmetry, (cp.R[A][B] + cp.R[B][A]).max_abs());
      cp.metricity = std::max(cp.metricity, (cp.R[A][B] + cp.R[A][B].transpose()).max_abs());
    }
  }

  cp.ric = RowMatrix::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c)
      for (int b = 0; b < k; ++b) cp.ric(a, c) += cp.R[b][a](b, c);
  cp.ric_symmetry = (cp.ric - cp.ric.transpose()).cwiseAbs().maxCoeff();
  cp.scal = cp.ric.trace();
  cp.tau = tau_from_scal(cp.scal, n);

  const QuaternionTriple& I = jet.frame.I;
  for (int s = 0; s < 3; ++s) {
    cp.rho[s] = Eigen::MatrixXd::Zero(m, m);
    for (int A = 0; A < m; ++A)
      for (int B = 0; B < m; ++B)
        if (A != B) cp.rho[s](A, B) = endo_inner(cp.R[A][B], I[s]);
  }
  return cp;
}

CurvatureAtPoint CurvatureField::at(std::span<const double> u, bool with_dtau, bool strict) const {
  const Steps& st = settings().steps;
  CurvatureAtPoint cp = build(u, st.curv, st.order, strict);
  if (with_dtau) {
    std::array<double, 3> d{};
    const Eigen::VectorXd x = to_vector(u);
    const VectorFn tau = [this](const Eigen::VectorXd& y) { return Eigen::VectorXd::Constant(1, tau_at(y)); };
    for (int s = 0; s < 3; ++s) {
      d[s] = directional_derivative(tau, x, cp.frame().xi.col(s), st.curv, st.order)(0);
    }
    cp.dtau = d;
  }
  return cp;
}

CurvatureAtPoint CurvatureField::at_step(std::span<const double> u, double h, int order, bool strict) const {
  return build(u, h, order, strict);
}

double CurvatureField::scal_at(const Eigen::VectorXd& u) const {
  const Steps& st = settings().steps;
  return build(std::span<const double>(u.data(), u.size()), st.curv, st.order, false).scal;
}

double CurvatureField::tau_at(const Eigen::VectorXd& u) const {
  return tau_from_scal(scal_at(u), cf_.frames().chart().n());
}

double CurvatureField::step_halving(std::span<const double> u, bool throw_on_noise) const {
  const Steps& st = settings().steps;
  const CurvatureAtPoint a = build(u, st.curv, st.order, false);
  const CurvatureAtPoint b = build(u, 0.5 * st.curv, st.order, false);
  double d = 0.0;
  for (std::size_t A = 0; A < a.R.size(); ++A)
    for (std::size_t B = 0; B < a.R.size(); ++B) d = std::max(d, (a.R[A][B] - b.R[A][B]).max_abs());
  if (throw_on_noise && !(d <= settings().tol.curvature)) {
    fail(ErrorKind::StepTooSmall, "curvature differs by " + std::to_string(d) + " between steps h and h/2");
  }
  return d;
}

EndoMatrix curvature_endo(const CurvatureAtPoint& cp, int A, int B) {
  if (A < 0 || B < 0 || A >= cp.m() || B >= cp.m()) fail(ErrorKind::SizeMismatch, "frame direction out of range");
  return cp.R[A][B];
}

double alpha_identity_check(const CurvatureAtPoint& cp, const Eigen::Matrix3d& alpha_perturbation) {
  const int k = 4 * cp.n;
  const PointFrame& fr = cp.frame();
  // dxi(s, j, l) = d eta_s(xi_j, xi_l)
  auto deta = [&](int s, int j, int l) { return fr.xi.col(j).dot(fr.jet.D[s] * fr.xi.col(l)); };
  const double half_sum = 0.5 * (deta(0, 1, 2) + deta(1, 2, 0) + deta(2, 0, 1));
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int l = (i + 2) % 3;
    for (int s = 0; s < 3; ++s) {
      const double lhs = cp.conn.xi.alpha(i, k + s) + alpha_perturbation(i, s);
      const double rhs = deta(s, j, l) - (i == s ? cp.tau + half_sum : 0.0);
      r = std::max(r, std::abs(lhs - rhs));
    }
  }
  return r;
}

double ricci_components_residual(const CurvatureAtPoint& cp) {
  const int n = cp.n;
  const int k = 4 * n;
  const TorsionTensors& tt = cp.conn.tensors;
  const RowMatrix model = (2.0 * n + 2.0) * tt.T0 + (4.0 * n + 10.0) * tt.U +
                          (cp.scal / (4.0 * n)) * RowMatrix::Identity(k, k);
  return (cp.ric - model).cwiseAbs().maxCoeff();
}

RicciCommutation ricci_commutation(const CurvatureAtPoint& cp) {
  const int n = cp.n;
  RicciCommutation rc;
  const RowMatrix& F = cp.conn.tensors.T0;
  for (int s = 0; s < 3; ++s) {
    const RowMatrix& Is = cp.frame().I[s].mat();
    const RowMatrix dr = Is.transpose() * cp.ric * Is - cp.ric;
    const RowMatrix dt = (2.0 * n + 2.0) * (Is.transpose() * F * Is - F);
    rc.violation = std::max(rc.violation, dr.cwiseAbs().maxCoeff());
    rc.predicted = std::max(rc.predicted, dt.cwiseAbs().maxCoeff());
    rc.agreement = std::max(rc.agreement, (dr - dt).cwiseAbs().maxCoeff());
  }
  return rc;
}

}  // namespace qclab
