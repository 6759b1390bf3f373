#include "qclab/connection.hpp"

#include <algorithm>
#include <cmath>

#include "qclab/diff.hpp"

namespace qclab {

namespace {

Eigen::VectorXd pack_frame(const PointFrame& fr) {
  const int m = fr.m();
  const int k = 4 * fr.n;
  Eigen::VectorXd v(m * m + 3 * k * k);
  const Eigen::MatrixXd F = fr.full();
  v.head(m * m) = Eigen::Map<const Eigen::VectorXd>(F.data(), m * m);
  for (int s = 0; s < 3; ++s) {
    const Eigen::MatrixXd Is = fr.I[s].mat();  // column-major copy
    v.segment(m * m + s * k * k, k * k) = Eigen::Map<const Eigen::VectorXd>(Is.data(), k * k);
  }
  return v;
}

double max_abs(const EndoMatrix& a) { return a.max_abs(); }

EndoMatrix perp_Q(const EndoMatrix& a, const QuaternionTriple& I) { return a - sp1_part(a, I); }

}  // namespace

EndoMatrix FrameJet::dI_along(int s, const Eigen::VectorXd& v) const {
  EndoMatrix out(n());
  for (int r = 0; r < m(); ++r) {
    if (v(r) != 0.0) out.mat() += v(r) * dI[s][r].mat();
  }
  return out;
}

Eigen::VectorXd FrameJet::bracket(int A, int B) const {
  const int dim = m();
  Eigen::VectorXd c_ab(dim);
  for (int C = 0; C < dim; ++C) c_ab(C) = c[C](A, B);
  return c_ab;
}

FrameJet frame_jet(const FrameField& ff, std::span<const double> u) {
  FrameJet jet;
  jet.frame = ff.at(u);
  const int n = jet.frame.n;
  const int m = jet.frame.m();
  const int k = 4 * n;
  jet.F = jet.frame.full();

  const Steps& steps = ff.settings().steps;
  const VectorFn f = [&ff](const Eigen::VectorXd& x) { return pack_frame(ff.at(x)); };
  const Eigen::MatrixXd J = jacobian(f, to_vector(u), steps.fd, steps.order);

  jet.dF.resize(m);
  for (int s = 0; s < 3; ++s) jet.dI[s].resize(m);
  for (int r = 0; r < m; ++r) {
    const Eigen::VectorXd col = J.col(r);
    jet.dF[r] = Eigen::Map<const Eigen::MatrixXd>(col.data(), m, m);
    for (int s = 0; s < 3; ++s) {
      const Eigen::MatrixXd Is = Eigen::Map<const Eigen::MatrixXd>(col.data() + m * m + s * k * k, k, k);
      jet.dI[s][r] = EndoMatrix(n, RowMatrix(Is));
    }
  }

  // [E_A, E_B] = (D E_B) E_A - (D E_A) E_B in coordinates, then frame components.
  std::vector<Eigen::MatrixXd> DE(m, Eigen::MatrixXd(m, m));  // DE[A](i, r) = d_r (E_A)^i
  for (int A = 0; A < m; ++A)
    for (int r = 0; r < m; ++r) DE[A].col(r) = jet.dF[r].col(A);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jet.F);
  jet.c.assign(m, Eigen::MatrixXd::Zero(m, m));
  for (int A = 0; A < m; ++A) {
    for (int B = A + 1; B < m; ++B) {
      const Eigen::VectorXd v = DE[B] * jet.F.col(A) - DE[A] * jet.F.col(B);
      const Eigen::VectorXd comp = lu.solve(v);
      for (int C = 0; C < m; ++C) {
        jet.c[C](A, B) = comp(C);
        jet.c[C](B, A) = -comp(C);
      }
    }
  }
  return jet;
}

HorizontalPart horizontal_partial(const FrameJet& jet) {
  const int n = jet.n();
  const int k = 4 * n;
  HorizontalPart hp;
  hp.omega.assign(k, EndoMatrix(n));
  auto cc = [&](int C, int A, int B) { return jet.c[C](A, B); };
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c) hp.omega[a](c, b) = 0.5 * (cc(c, a, b) - cc(a, b, c) + cc(b, c, a));

  for (int a = 0; a < k; ++a) {
    hp.metricity = std::max(hp.metricity, (hp.omega[a].mat() + hp.omega[a].mat().transpose()).cwiseAbs().maxCoeff());
    for (int b = 0; b < k; ++b)
      for (int c = 0; c < k; ++c)
        hp.torsion = std::max(hp.torsion, std::abs(hp.omega[a](c, b) - hp.omega[b](c, a) - cc(c, a, b)));
  }
  return hp;
}

namespace {

// Orthonormal basis (Frobenius) of skew endomorphisms orthogonal to P and Q.
std::vector<EndoMatrix> complement_basis(const QuaternionTriple& I) {
  const int n = I.n();
  const int k = 4 * n;
  std::vector<EndoMatrix> raw;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      EndoMatrix e(n);
      e(i, j) = 1.0;
      e(j, i) = -1.0;
      raw.push_back(project_torsion_space(e, I));
    }
  }
  Eigen::MatrixXd M(k * k, static_cast<Eigen::Index>(raw.size()));
  for (std::size_t j = 0; j < raw.size(); ++j) {
    M.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(raw[j].mat().data(), k * k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  std::vector<EndoMatrix> basis;
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) > 1e-9 * std::max(1.0, sv(0))) {
      const Eigen::VectorXd col = svd.matrixU().col(j);
      RowMatrix b = Eigen::Map<const RowMatrix>(col.data(), k, k);
      EndoMatrix e(n, b);
      basis.push_back(e.skew());
    }
  }
  return basis;
}

}  // namespace

VerticalPart vertical_on_H(const FrameJet& jet, const Tolerances& tol, bool strict) {
  const int n = jet.n();
  const int k = 4 * n;
  const QuaternionTriple& I = jet.frame.I;
  VerticalPart vp;
  const std::vector<EndoMatrix> K = complement_basis(I);
  vp.complement_dim = static_cast<int>(K.size());

  for (int s = 0; s < 3; ++s) {
    EndoMatrix B(n);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) B(b, a) = jet.c[b](k + s, a);
    vp.B[s] = B;
    EndoMatrix C = project_P(B, I) + sp1_part(B, I);

    const Eigen::VectorXd dir = jet.direction(k + s);
    std::array<EndoMatrix, 3> rhs;
    for (int t = 0; t < 3; ++t) rhs[t] = perp_Q(jet.dI_along(t, dir) + commutator(C, I[t]), I);

    if (!K.empty()) {
      const int rows = 3 * k * k;
      Eigen::MatrixXd A(rows, static_cast<Eigen::Index>(K.size()));
      Eigen::VectorXd b(rows);
      for (std::size_t j = 0; j < K.size(); ++j) {
        for (int t = 0; t < 3; ++t) {
          const EndoMatrix col = perp_Q(commutator(K[j], I[t]), I);
          A.block(t * k * k, static_cast<Eigen::Index>(j), k * k, 1) =
              Eigen::Map<const Eigen::VectorXd>(col.mat().data(), k * k);
        }
      }
      for (int t = 0; t < 3; ++t) b.segment(t * k * k, k * k) = -Eigen::Map<const Eigen::VectorXd>(rhs[t].mat().data(), k * k);
      const Eigen::VectorXd kappa = A.colPivHouseholderQr().solve(b);
      for (std::size_t j = 0; j < K.size(); ++j) C += kappa(static_cast<Eigen::Index>(j)) * K[j];
    }
    vp.C[s] = C;
    vp.T[s] = C - B;
    for (int t = 0; t < 3; ++t) {
      const EndoMatrix d = perp_Q(jet.dI_along(t, dir) + commutator(C, I[t]), I);
      vp.q_residual = std::max(vp.q_residual, max_abs(d));
    }
  }
  if (strict && !(vp.q_residual <= tol.connection)) {
    fail(ErrorKind::QPreservationFail,
         "vertical connection does not preserve Q (residual " + std::to_string(vp.q_residual) + ")");
  }
  return vp;
}

XiDerivatives xi_derivatives(const FrameJet& jet, const HorizontalPart& hp, const VerticalPart& vp) {
  const int k = 4 * jet.n();
  const int m = jet.m();
  const QuaternionTriple& I = jet.frame.I;
  XiDerivatives xd;
  xd.theta.resize(m);
  xd.q.resize(m);
  xd.alpha.resize(3, m);
  for (int A = 0; A < m; ++A) {
    const EndoMatrix& Om = A < k ? hp.omega[A] : vp.C[A - k];
    const Eigen::VectorXd dir = jet.direction(A);
    Eigen::Matrix3d q;
    for (int s = 0; s < 3; ++s) {
      const EndoMatrix nI = jet.dI_along(s, dir) + commutator(Om, I[s]);
      for (int t = 0; t < 3; ++t) q(s, t) = endo_inner(nI, I[t]);
      if (A < k) xd.q_residual_H = std::max(xd.q_residual_H, perp_Q(nI, I).max_abs());
    }
    xd.q[A] = q;
    Eigen::Matrix3d th;
    if (A < k) {
      // nabla_{e_a} xi_s = [e_a, xi_s]_V
      for (int s = 0; s < 3; ++s)
        for (int t = 0; t < 3; ++t) th(t, s) = jet.c[k + t](A, k + s);
      xd.phi_transfer = std::max(xd.phi_transfer, (th - q.transpose()).cwiseAbs().maxCoeff());
    } else {
      // nabla xi_s = phi^{-1}(nabla I_s)
      th = q.transpose();
    }
    xd.theta[A] = th;
    xd.v_metricity = std::max(xd.v_metricity, (th + th.transpose()).cwiseAbs().maxCoeff());
    // alpha_k(A) = g(nabla_A xi_i, xi_j), (i, j, k) cyclic
    for (int kk = 0; kk < 3; ++kk) {
      const int i = (kk + 1) % 3;
      const int j = (kk + 2) % 3;
      xd.alpha(kk, A) = th(j, i);
    }
  }
  return xd;
}

double TorsionSplit::max() const { return std::max({u_spread, anticommute, cross, u_structure}); }

TorsionSplit torsion_split(const std::array<EndoMatrix, 3>& T, const QuaternionTriple& I, const Tolerances& tol,
                           bool strict) {
  const int n = I.n();
  TorsionSplit ts;
  std::array<EndoMatrix, 3> us;
  ts.u = EndoMatrix(n);
  for (int s = 0; s < 3; ++s) {
    ts.T0[s] = T[s].sym();
    ts.b[s] = T[s].skew();
    us[s] = -1.0 * (I[s] * ts.b[s]);
    ts.u += us[s];
  }
  ts.u *= 1.0 / 3.0;
  for (int s = 0; s < 3; ++s) {
    ts.u_spread = std::max(ts.u_spread, (us[s] - ts.u).max_abs());
    ts.anticommute = std::max(ts.anticommute, (ts.T0[s] * I[s] + I[s] * ts.T0[s]).max_abs());
  }
  std::array<FourPartSplit, 3> f;
  for (int s = 0; s < 3; ++s) f[s] = four_part_decompose(ts.T0[s], I);
  ts.cross = std::max({(I[1] * f[1].p_pmm - I[0] * f[0].p_mpm).max_abs(),
                       (I[2] * f[2].p_mpm - I[1] * f[1].p_mmp).max_abs(),
                       (I[0] * f[0].p_mmp - I[2] * f[2].p_pmm).max_abs()});
  ts.u_structure = std::max((ts.u - ts.u.transpose()).max_abs(), std::abs(ts.u.trace()));
  for (int t = 0; t < 3; ++t) ts.u_structure = std::max(ts.u_structure, commutator(ts.u, I[t]).max_abs());
  if (strict && !(ts.max() <= tol.torsion)) {
    fail(ErrorKind::TorsionStructureFail,
         "torsion endomorphisms violate the structural identities (residual " + std::to_string(ts.max()) + ")");
  }
  return ts;
}

TorsionTensors torsion_tensors(const TorsionSplit& split, const QuaternionTriple& I) {
  const int n = I.n();
  TorsionTensors tt;
  EndoMatrix M(n);
  for (int s = 0; s < 3; ++s) M += split.T0[s] * I[s];
  // T0(X, Y) = g(M X, Y): matrix entry (a, b) is M_{ba}.
  tt.T0 = M.mat().transpose();
  tt.U = split.u.mat().transpose();
  const RowMatrix& F = tt.T0;
  const RowMatrix& U = tt.U;
  RowMatrix sumF = F;
  for (int s = 0; s < 3; ++s) {
    const RowMatrix& Is = I[s].mat();
    sumF += Is.transpose() * F * Is;
    tt.propt_U = std::max(tt.propt_U, (U - Is.transpose() * U * Is).cwiseAbs().maxCoeff());
    tt.traces = std::max({tt.traces, std::abs((F * Is).trace()), std::abs((U * Is).trace())});
    const RowMatrix lhs = 4.0 * split.T0[s].mat().transpose();
    tt.newequiv = std::max(tt.newequiv, (lhs + Is.transpose() * F + F * Is).cwiseAbs().maxCoeff());
  }
  tt.propt_T0 = sumF.cwiseAbs().maxCoeff();
  tt.traces = std::max({tt.traces, std::abs(F.trace()), std::abs(U.trace())});
  tt.symmetry = std::max((F - F.transpose()).cwiseAbs().maxCoeff(), (U - U.transpose()).cwiseAbs().maxCoeff());
  return tt;
}

double newtor_check(const std::array<EndoMatrix, 3>& T, const TorsionTensors& tt, const QuaternionTriple& I) {
  double r = 0.0;
  for (int s = 0; s < 3; ++s) {
    const RowMatrix& Is = I[s].mat();
    const RowMatrix lhs = T[s].mat().transpose();
    const RowMatrix rhs = -0.25 * (Is.transpose() * tt.T0 + tt.T0 * Is) + Is.transpose() * tt.U;
    r = std::max(r, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  return r;
}

VTriple ConnectionAtPoint::nabla_xi_along_H(int a, int s) const {
  const Eigen::Matrix3d& th = xi.theta[a];
  return {th(0, s), th(1, s), th(2, s)};
}

ConnectionAtPoint ConnectionField::at(std::span<const double> u, bool strict) const {
  const Tolerances& tol = settings().tol;
  ConnectionAtPoint cp;
  cp.jet = frame_jet(ff_, u);
  cp.n = cp.jet.n();
  const QuaternionTriple& I = cp.jet.frame.I;
  cp.horizontal = horizontal_partial(cp.jet);
  cp.vertical = vertical_on_H(cp.jet, tol, strict);
  cp.xi = xi_derivatives(cp.jet, cp.horizontal, cp.vertical);
  if (strict && !(cp.xi.q_residual_H <= tol.connection)) {
    fail(ErrorKind::QPreservationFail,
         "horizontal connection does not preserve Q (residual " + std::to_string(cp.xi.q_residual_H) + ")");
  }
  cp.omega = cp.horizontal.omega;
  for (int s = 0; s < 3; ++s) cp.omega.push_back(cp.vertical.C[s]);
  cp.split = torsion_split(cp.vertical.T, I, tol, strict);
  cp.tensors = torsion_tensors(cp.split, I);
  cp.newtor = newtor_check(cp.vertical.T, cp.tensors, I);
  for (int s = 0; s < 3; ++s) {
    const EndoMatrix& Ts = cp.vertical.T[s];
    cp.trace_free = std::max(cp.trace_free, std::abs(Ts.trace()));
    for (int t = 0; t < 3; ++t) cp.trace_free = std::max(cp.trace_free, std::abs((Ts * I[t]).trace()));
    cp.torsion_space = std::max(cp.torsion_space, (Ts - project_torsion_space(Ts, I)).max_abs());
  }
  return cp;
}

std::vector<EndoMatrix> ConnectionField::omega_at(const Eigen::VectorXd& u) const {
  const FrameJet jet = frame_jet(ff_, std::span<const double>(u.data(), u.size()));
  const HorizontalPart hp = horizontal_partial(jet);
  const VerticalPart vp = vertical_on_H(jet, settings().tol, false);
  std::vector<EndoMatrix> om = hp.omega;
  for (int s = 0; s < 3; ++s) om.push_back(vp.C[s]);
  return om;
}

}  // namespace qclab
