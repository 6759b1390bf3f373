#include "qclab/twistor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <limits>
#include <numbers>
#include <random>

#include "qclab/diff.hpp"

namespace qclab {

namespace {

Eigen::Vector3d vec3(const VTriple& v) { return {v[0], v[1], v[2]}; }
VTriple triple(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

template <class Triple>
EndoMatrix combine(const Triple& I, const Eigen::Vector3d& w) {
  return w(0) * I[0] + w(1) * I[1] + w(2) * I[2];
}

}  // namespace

TwistorPoint TwistorPoint::make(std::vector<double> u, const VTriple& x) {
  const double r = std::sqrt(v_dot(x, x));
  if (!(r > 0.0)) fail(ErrorKind::SizeMismatch, "twistor point needs a nonzero fibre vector");
  TwistorPoint tp;
  tp.u = std::move(u);
  tp.x = {x[0] / r, x[1] / r, x[2] / r};
  return tp;
}

Eigen::Matrix3d gauge_rotation(const VTriple& xin) {
  const Eigen::Vector3d x = vec3(xin).normalized();
  const double c = x(0);
  if (c <= -1.0 + 1e-14) return Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
  const Eigen::Vector3d a = Eigen::Vector3d::UnitX().cross(x);
  Eigen::Matrix3d K;
  K << 0.0, -a(2), a(1), a(2), 0.0, -a(0), -a(1), a(0), 0.0;
  return c * Eigen::Matrix3d::Identity() + K + a * a.transpose() / (1.0 + c);
}

PointFrame gauge_rotate(const PointFrame& fr, const VTriple& x) {
  const Eigen::Matrix3d R = gauge_rotation(x);
  PointFrame out = fr;
  out.xi = fr.xi * R;
  out.jet.C = R.transpose() * fr.jet.C;
  for (int s = 0; s < 3; ++s) {
    out.I[s] = combine(fr.I, R.col(s));
    out.jet.D[s] = R(0, s) * fr.jet.D[0] + R(1, s) * fr.jet.D[1] + R(2, s) * fr.jet.D[2];
  }
  out.bi1_residual = biquard_residual(out);
  return out;
}

double biquard_residual(const PointFrame& fr) {
  double r = 0.0;
  for (int s = 0; s < 3; ++s) {
    for (int t = s; t < 3; ++t) {
      const Eigen::RowVectorXd v = fr.xi.col(t).transpose() * fr.jet.D[s] * fr.eH +
                                   fr.xi.col(s).transpose() * fr.jet.D[t] * fr.eH;
      r = std::max(r, v.cwiseAbs().maxCoeff());
    }
  }
  return r;
}

TwistorContext TwistorContext::from(const PointFrame& fr, const VTriple& x, double tau) {
  TwistorContext c;
  c.n = fr.n;
  const Eigen::Vector3d xn = vec3(x).normalized();
  c.x = triple(xn);
  c.I = combine(fr.I, xn);
  c.tau = tau;
  return c;
}

TwistorTangent TwistorContext::zero() const {
  TwistorTangent t;
  t.baseH = Eigen::VectorXd::Zero(4 * n);
  return t;
}

TwistorTangent TwistorContext::chi() const {
  TwistorTangent t = zero();
  t.baseV = x;
  return t;
}

std::vector<TwistorTangent> TwistorContext::tangent_basis() const {
  const Eigen::Matrix3d R = gauge_rotation(x);
  std::vector<TwistorTangent> b;
  for (int a = 0; a < 4 * n; ++a) {
    TwistorTangent t = zero();
    t.baseH(a) = 1.0;
    b.push_back(t);
  }
  for (int s = 0; s < 3; ++s) {
    TwistorTangent t = zero();
    t.baseV = triple(R.col(s));
    b.push_back(t);
  }
  for (int s = 1; s < 3; ++s) {
    TwistorTangent t = zero();
    t.vert = triple(R.col(s));
    b.push_back(t);
  }
  return b;
}

std::vector<TwistorTangent> TwistorContext::d_basis() const {
  std::vector<TwistorTangent> b = tangent_basis();
  b.erase(b.begin() + 4 * n);
  return b;
}

double eta_Z(const TwistorContext& c, const TwistorTangent& t) { return v_dot(c.x, t.baseV); }

TwistorTangent phi(const TwistorContext& c, const TwistorTangent& t) {
  TwistorTangent o;
  o.baseH = c.I.mat() * t.baseH;
  o.baseV = v_cross(c.x, t.baseV);
  o.vert = v_cross(c.x, t.vert);
  return o;
}

double metric_G(const TwistorContext& c, const TwistorTangent& a, const TwistorTangent& b) {
  const double xa = v_dot(c.x, a.baseV);
  const double xb = v_dot(c.x, b.baseV);
  return a.baseH.dot(b.baseH) - c.tau * v_dot(a.baseV, b.baseV) + (c.tau + 1.0) * xa * xb +
         0.5 * v_dot(v_cross(c.x, a.baseV), b.vert) + 0.5 * v_dot(v_cross(c.x, b.baseV), a.vert);
}

double d_eta_Z(const TwistorContext& c, const TwistorTangent& a, const TwistorTangent& b) {
  return 2.0 * (c.I.mat() * a.baseH).dot(b.baseH) - 2.0 * c.tau * v_dot(v_cross(c.x, a.baseV), b.baseV) -
         v_dot(a.baseV, b.vert) + v_dot(b.baseV, a.vert);
}

double metric_G_from_definition(const TwistorContext& c, const TwistorTangent& a, const TwistorTangent& b) {
  return 0.5 * d_eta_Z(c, a, phi(c, b)) + eta_Z(c, a) * eta_Z(c, b);
}

TwistorTangent operator+(const TwistorTangent& a, const TwistorTangent& b) {
  TwistorTangent o;
  o.baseH = a.baseH + b.baseH;
  for (int s = 0; s < 3; ++s) {
    o.baseV[s] = a.baseV[s] + b.baseV[s];
    o.vert[s] = a.vert[s] + b.vert[s];
  }
  return o;
}

TwistorTangent operator*(double k, const TwistorTangent& a) {
  TwistorTangent o;
  o.baseH = k * a.baseH;
  for (int s = 0; s < 3; ++s) {
    o.baseV[s] = k * a.baseV[s];
    o.vert[s] = k * a.vert[s];
  }
  return o;
}

double max_abs_diff(const TwistorTangent& a, const TwistorTangent& b) {
  double r = (a.baseH - b.baseH).cwiseAbs().maxCoeff();
  for (int s = 0; s < 3; ++s) {
    r = std::max(r, std::abs(a.baseV[s] - b.baseV[s]));
    r = std::max(r, std::abs(a.vert[s] - b.vert[s]));
  }
  return r;
}

ContactIdentities contact_identities(const TwistorContext& c) {
  ContactIdentities r;
  const std::vector<TwistorTangent> B = c.tangent_basis();
  const TwistorTangent chi = c.chi();
  for (const auto& a : B) {
    const TwistorTangent pa = phi(c, a);
    r.phi_square = std::max(r.phi_square, max_abs_diff(phi(c, pa) + a, eta_Z(c, a) * chi));
    r.g_chi = std::max(r.g_chi, std::abs(metric_G(c, a, chi) - eta_Z(c, a)));
    for (const auto& b : B) {
      const double g = metric_G(c, a, b);
      r.g_compatible = std::max(r.g_compatible, std::abs(metric_G(c, pa, phi(c, b)) - g + eta_Z(c, a) * eta_Z(c, b)));
      r.deta_g = std::max(r.deta_g, std::abs(d_eta_Z(c, a, b) - 2.0 * metric_G(c, pa, b)));
      r.g_definition = std::max(r.g_definition, std::abs(g - metric_G_from_definition(c, a, b)));
    }
  }
  r.g_chi = std::max(r.g_chi, std::abs(metric_G(c, chi, chi) - 1.0));
  return r;
}

Signature metric_signature(const TwistorContext& c, double zero_tol) {
  const std::vector<TwistorTangent> b = c.tangent_basis();
  const int d = static_cast<int>(b.size());
  Eigen::MatrixXd G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = metric_G(c, b[i], b[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  Signature s;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > zero_tol) ++s.positive;
    else if (l < -zero_tol) ++s.negative;
    else ++s.zero;
  }
  return s;
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::normal: return "normal";
    case Verdict::not_normal: return "not_normal";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict normality_verdict(double residual, double t0_norm, const Tolerances& tol) {
  if (residual <= tol.normal && t0_norm <= tol.t0) return Verdict::normal;
  if (residual >= 10.0 * tol.normal || t0_norm >= 10.0 * tol.t0) return Verdict::not_normal;
  return Verdict::inconclusive;
}

TwistorReport lie_chi_G(const CurvatureAtPoint& cp, const VTriple& xin, const Tolerances& tol) {
  if (!cp.dtau) fail(ErrorKind::SizeMismatch, "lie_chi_G needs d tau at the base point");
  const int n = cp.n;
  const int k = 4 * n;
  TwistorReport rep;
  rep.tp = TwistorPoint::make(cp.frame().point, xin);
  const Eigen::Vector3d x = vec3(rep.tp.x);
  const Eigen::Matrix3d R = gauge_rotation(rep.tp.x);
  rep.rotation = R;
  rep.tau = cp.tau;

  // rho'_s(A, B) for frame vectors A, B given by coefficient columns.
  auto rho_rot = [&](int s, const Eigen::VectorXd& A, const Eigen::VectorXd& B) {
    double v = 0.0;
    for (int u = 0; u < 3; ++u) v += R(u, s) * A.dot(cp.rho[u] * B);
    return v;
  };
  const int m = cp.m();
  auto vertical = [&](const Eigen::Vector3d& w) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e.tail(3) = w;
    return e;
  };
  const Eigen::VectorXd xi1 = vertical(R.col(0));

  const EndoMatrix T0x = combine(cp.conn.split.T0, x);
  rep.LchiG_HH = 2.0 * T0x.mat().transpose();

  rep.LchiG_HV = Eigen::MatrixXd::Zero(k, 2);
  for (int s = 1; s < 3; ++s) {
    for (int a = 0; a < k; ++a) {
      Eigen::VectorXd ea = Eigen::VectorXd::Zero(m);
      ea(a) = 1.0;
      double br = 0.0;  // g([xi'_s, xi'_1], e_a)
      for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v) br += R(u, s) * R(v, 0) * cp.conn.jet.c[a](k + u, k + v);
      rep.LchiG_HV(a, s - 1) = rho_rot(s, ea, xi1) + br;
    }
  }

  const std::array<double, 3>& dt = *cp.dtau;
  const double dtau1 = x(0) * dt[0] + x(1) * dt[1] + x(2) * dt[2];
  for (int s = 1; s < 3; ++s) {
    for (int t = 1; t < 3; ++t) {
      rep.LchiG_VV(s - 1, t - 1) = (s == t ? -dtau1 : 0.0) + rho_rot(s, vertical(R.col(t)), xi1) +
                                   rho_rot(t, vertical(R.col(s)), xi1);
    }
  }

  rep.LchiG_D = Eigen::MatrixXd::Zero(k + 4, k + 4);
  rep.LchiG_D.topLeftCorner(k, k) = rep.LchiG_HH;
  rep.LchiG_D.block(0, k, k, 2) = rep.LchiG_HV;
  rep.LchiG_D.block(k, 0, 2, k) = rep.LchiG_HV.transpose();
  rep.LchiG_D.block(k, k, 2, 2) = rep.LchiG_VV;
  rep.normality_residual = rep.LchiG_D.cwiseAbs().maxCoeff();
  rep.T0_norm = cp.conn.tensors.T0_norm();

  rep.mte2 = rep.LchiG_HV.cwiseAbs().maxCoeff();
  for (int s = 1; s < 3; ++s) {
    rep.mte3 = std::max(rep.mte3, std::abs(2.0 * rho_rot(s, vertical(R.col(s)), xi1) - dtau1));
  }
  rep.mte4 = std::abs(rho_rot(1, vertical(R.col(2)), xi1) + rho_rot(2, vertical(R.col(1)), xi1));
  rep.verdict = normality_verdict(rep.normality_residual, rep.T0_norm, tol);
  return rep;
}

std::vector<VTriple> fibonacci_sphere(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  q.normalize();
  const Eigen::Matrix3d Q = q.toRotationMatrix();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<VTriple> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double ph = golden * i;
    out.push_back(triple(Q * Eigen::Vector3d(r * std::cos(ph), r * std::sin(ph), z)));
  }
  return out;
}

// Finite-difference realization of the twistor space near a point.
namespace {

struct BaseSample {
  Eigen::MatrixXd F;  // [eH | xi]
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  std::vector<Eigen::Matrix3d> q;  // q[A](s, t) = <nabla_{E_A} I_s, I_t>
  QuaternionTriple I;
  Eigen::MatrixXd C;  // coframe matrix
  double tau = std::numeric_limits<double>::quiet_NaN();
};

struct Split {
  Eigen::VectorXd kappa;  // frame components of the base part
  Eigen::Vector3d a;      // vertical part in I_s coefficients
};

class LocalTwistor {
 public:
  LocalTwistor(const CurvatureField& cf, bool flip_vertical = false)
      : cf_(cf), n_(cf.connection().frames().chart().n()), k_(4 * n_), m_(k_ + 3), flip_(flip_vertical) {}

  int m() const { return m_; }
  int k() const { return k_; }
  int dim() const { return m_ + 3; }
  double h() const { return cf_.settings().steps.curv; }
  int order() const { return cf_.settings().steps.order; }

  const BaseSample& base(const Eigen::VectorXd& z, bool need_tau) const {
    const std::vector<double> key(z.data(), z.data() + m_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      auto bs = std::make_shared<BaseSample>();
      const ConnectionAtPoint cp = cf_.connection().at(std::span<const double>(key), false);
      bs->F = cp.jet.F;
      bs->lu.compute(bs->F);
      bs->q = cp.xi.q;
      bs->I = cp.frame().I;
      bs->C = cp.frame().jet.C;
      it = cache_.emplace(key, std::move(bs)).first;
    }
    BaseSample& bs = *it->second;
    if (need_tau && std::isnan(bs.tau)) bs.tau = cf_.tau_at(Eigen::Map<const Eigen::VectorXd>(key.data(), m_));
    return bs;
  }

  static Eigen::Vector3d fibre(const Eigen::VectorXd& z) { return z.tail(3); }

  Eigen::Matrix3d q_along(const BaseSample& bs, const Eigen::VectorXd& v) const {
    const Eigen::VectorXd coeff = bs.lu.solve(v);
    Eigen::Matrix3d q = Eigen::Matrix3d::Zero();
    for (int A = 0; A < m_; ++A) q += coeff(A) * bs.q[A];
    return q;
  }

  // Parallel transport of y = sum y_s I_s along v: ydot_t = -sum_s y_s q_v(s, t).
  Eigen::Vector3d lift_fibre(const BaseSample& bs, const Eigen::VectorXd& v, const Eigen::Vector3d& y) const {
    return -q_along(bs, v).transpose() * y;
  }

  Split split(const Eigen::VectorXd& z, const Eigen::VectorXd& vec) const {
    const BaseSample& bs = base(z, false);
    const Eigen::Vector3d y = fibre(z);
    const double r = y.norm();
    const Eigen::Vector3d nh = y / r;
    const Eigen::VectorXd v = vec.head(m_);
    Split s;
    s.kappa = bs.lu.solve(v);
    const Eigen::Vector3d w = vec.tail(3) - lift_fibre(bs, v, y);
    s.a = (w - w.dot(nh) * nh) / r;
    return s;
  }

  Eigen::VectorXd compose(const Eigen::VectorXd& z, const Eigen::VectorXd& kappa, const Eigen::Vector3d& a) const {
    const BaseSample& bs = base(z, false);
    const Eigen::Vector3d y = fibre(z);
    Eigen::VectorXd out(dim());
    const Eigen::VectorXd v = bs.F * kappa;
    out.head(m_) = v;
    out.tail(3) = lift_fibre(bs, v, y) + y.norm() * a;
    return out;
  }

  TwistorContext context(const Eigen::VectorXd& z, bool need_tau) const {
    const BaseSample& bs = base(z, need_tau);
    const Eigen::Vector3d nh = fibre(z).normalized();
    TwistorContext c;
    c.n = n_;
    c.x = triple(nh);
    c.I = combine(bs.I, nh);
    c.tau = need_tau ? bs.tau : 0.0;
    return c;
  }

  TwistorTangent tangent(const Eigen::VectorXd& z, const Eigen::VectorXd& vec) const {
    const Split s = split(z, vec);
    TwistorTangent t;
    t.baseH = s.kappa.head(k_);
    t.baseV = triple(s.kappa.tail(3));
    t.vert = triple(s.a);
    return t;
  }

  double G(const Eigen::VectorXd& z, const Eigen::VectorXd& A, const Eigen::VectorXd& B) const {
    return metric_G(context(z, true), tangent(z, A), tangent(z, B));
  }

  double eta(const Eigen::VectorXd& z, const Eigen::VectorXd& A) const {
    const BaseSample& bs = base(z, false);
    const Eigen::Vector3d nh = fibre(z).normalized();
    return nh.dot(bs.C * A.head(m_));
  }

  Eigen::VectorXd J(const Eigen::VectorXd& z, const Eigen::VectorXd& A) const {
    const BaseSample& bs = base(z, false);
    const Eigen::Vector3d nh = fibre(z).normalized();
    const Split s = split(z, A);
    Eigen::VectorXd kappa(m_);
    kappa.head(k_) = combine(bs.I, nh).mat() * s.kappa.head(k_);
    kappa.tail(3) = nh.cross(Eigen::Vector3d(s.kappa.tail(3)));
    const Eigen::Vector3d a = (flip_ ? -1.0 : 1.0) * nh.cross(s.a);
    return compose(z, kappa, a);
  }

  // Field builders. Values at the base point reproduce TwistorContext::tangent_basis().
  VectorFn horizontal(int a) const {
    return [this, a](const Eigen::VectorXd& z) {
      Eigen::VectorXd kappa = Eigen::VectorXd::Zero(m_);
      kappa(a) = 1.0;
      return compose(z, kappa, Eigen::Vector3d::Zero());
    };
  }
  VectorFn chi() const {
    return [this](const Eigen::VectorXd& z) {
      Eigen::VectorXd kappa = Eigen::VectorXd::Zero(m_);
      kappa.tail(3) = fibre(z).normalized();
      return compose(z, kappa, Eigen::Vector3d::Zero());
    };
  }
  // Lift of sum (c x n)_s xi_s.
  VectorFn zeta(const Eigen::Vector3d& c) const {
    return [this, c](const Eigen::VectorXd& z) {
      Eigen::VectorXd kappa = Eigen::VectorXd::Zero(m_);
      kappa.tail(3) = c.cross(fibre(z).normalized());
      return compose(z, kappa, Eigen::Vector3d::Zero());
    };
  }
  // Fibre field c - (c.n) n.
  VectorFn vertical(const Eigen::Vector3d& c) const {
    return [this, c](const Eigen::VectorXd& z) {
      const Eigen::Vector3d nh = fibre(z).normalized();
      Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
      out.tail(3) = c - c.dot(nh) * nh;
      return out;
    };
  }
  VectorFn apply_J(VectorFn f) const {
    return [this, f](const Eigen::VectorXd& z) { return J(z, f(z)); };
  }

  // D-basis fields (with_chi inserts chi after the horizontal ones).
  std::vector<VectorFn> basis_fields(const Eigen::Vector3d& x, bool with_chi) const {
    const Eigen::Matrix3d R = gauge_rotation(triple(x));
    std::vector<VectorFn> f;
    for (int a = 0; a < k_; ++a) f.push_back(horizontal(a));
    if (with_chi) f.push_back(chi());
    f.push_back(zeta(R.col(2)));   // xi'_2 at the point
    f.push_back(zeta(-R.col(1)));  // xi'_3
    f.push_back(vertical(R.col(1)));
    f.push_back(vertical(R.col(2)));
    return f;
  }

  // D[i] = derivative of all fields (stacked) along direction dirs[i].
  std::vector<Eigen::MatrixXd> derivatives(const std::vector<VectorFn>& fields, const Eigen::VectorXd& z0,
                                           const std::vector<Eigen::VectorXd>& dirs) const {
    const int d = dim();
    const VectorFn stacked = [&fields, d](const Eigen::VectorXd& z) {
      Eigen::VectorXd v(d * static_cast<Eigen::Index>(fields.size()));
      for (std::size_t i = 0; i < fields.size(); ++i) v.segment(static_cast<Eigen::Index>(i) * d, d) = fields[i](z);
      return v;
    };
    std::vector<Eigen::MatrixXd> out;
    for (const auto& dir : dirs) {
      const Eigen::VectorXd dv = directional_derivative(stacked, z0, dir, h(), order());
      out.push_back(Eigen::Map<const Eigen::MatrixXd>(dv.data(), d, static_cast<Eigen::Index>(fields.size())));
    }
    return out;
  }

 private:
  const CurvatureField& cf_;
  int n_;
  int k_;
  int m_;
  bool flip_;
  mutable std::map<std::vector<double>, std::shared_ptr<BaseSample>> cache_;
};

Eigen::VectorXd base_point(const TwistorPoint& tp) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(tp.u.size()) + 3);
  z.head(static_cast<Eigen::Index>(tp.u.size())) = to_vector(tp.u);
  z.tail(3) = vec3(tp.x);
  return z;
}

std::vector<Eigen::VectorXd> values(const std::vector<VectorFn>& f, const Eigen::VectorXd& z) {
  std::vector<Eigen::VectorXd> v;
  for (const auto& g : f) v.push_back(g(z));
  return v;
}

// Unit-norm random coefficient vectors.
Eigen::MatrixXd random_pairs(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd P(dim, 2 * count);
  for (int j = 0; j < 2 * count; ++j) {
    for (int i = 0; i < dim; ++i) P(i, j) = nd(rng);
    P.col(j).normalize();
  }
  return P;
}

}  // namespace

OracleResult normality_direct_oracle(const CurvatureField& cf, const TwistorReport& report, int sample_pairs,
                                     std::uint64_t seed) {
  const LocalTwistor lt(cf);
  const Eigen::VectorXd z0 = base_point(report.tp);
  const std::vector<VectorFn> S = lt.basis_fields(vec3(report.tp.x), false);
  const VectorFn chi = lt.chi();
  const int d = static_cast<int>(S.size());
  const std::vector<Eigen::VectorXd> S0 = values(S, z0);
  const Eigen::VectorXd chi0 = chi(z0);

  // chi(G(S_i, S_j)) by differencing the pulled-back metric along chi.
  const VectorFn gram = [&](const Eigen::VectorXd& z) {
    const std::vector<Eigen::VectorXd> v = values(S, z);
    Eigen::VectorXd g(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) g(i * d + j) = lt.G(z, v[i], v[j]);
    return g;
  };
  const Eigen::VectorXd dgram = directional_derivative(gram, z0, chi0, lt.h(), lt.order());

  // [chi, S_i] = D_chi S_i - D_{S_i} chi.
  std::vector<VectorFn> chi_only{chi};
  const std::vector<Eigen::MatrixXd> DS = lt.derivatives(S, z0, {chi0});
  const std::vector<Eigen::MatrixXd> Dchi = lt.derivatives(chi_only, z0, S0);
  std::vector<Eigen::VectorXd> br(d);
  for (int i = 0; i < d; ++i) br[i] = DS[0].col(i) - Dchi[i].col(0);

  OracleResult out;
  out.direct = Eigen::MatrixXd(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      out.direct(i, j) = dgram(i * d + j) - lt.G(z0, br[i], S0[j]) - lt.G(z0, S0[i], br[j]);
  out.closed = report.LchiG_D;
  out.matrix_deviation = (out.direct - out.closed).cwiseAbs().maxCoeff();
  out.direct_max = out.direct.cwiseAbs().maxCoeff();
  const int k = lt.k();
  out.hh_deviation = (out.direct.topLeftCorner(k, k) - report.LchiG_HH).cwiseAbs().maxCoeff();
  out.vertical_max = out.direct.bottomRightCorner(2, 2).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd P = random_pairs(d, sample_pairs, seed);
  for (int p = 0; p < sample_pairs; ++p) {
    const Eigen::VectorXd a = P.col(2 * p);
    const Eigen::VectorXd b = P.col(2 * p + 1);
    out.pair_deviation = std::max(out.pair_deviation, std::abs(a.dot((out.direct - out.closed) * b)));
  }
  return out;
}

namespace {

// d eta^Z on the given fields by A(eta(B)) - B(eta(A)) - eta([A, B]).
Eigen::MatrixXd deta_direct(const LocalTwistor& lt, const std::vector<VectorFn>& T, const Eigen::VectorXd& z0) {
  const int d = static_cast<int>(T.size());
  const std::vector<Eigen::VectorXd> T0 = values(T, z0);
  const VectorFn etas = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd e(d);
    for (int j = 0; j < d; ++j) e(j) = lt.eta(z, T[j](z));
    return e;
  };
  Eigen::MatrixXd Deta(d, d);  // Deta(i, j) = T_i(eta(T_j))
  for (int i = 0; i < d; ++i) Deta.row(i) = directional_derivative(etas, z0, T0[i], lt.h(), lt.order()).transpose();
  const std::vector<Eigen::MatrixXd> DT = lt.derivatives(T, z0, T0);
  Eigen::MatrixXd M(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Eigen::VectorXd bracket = DT[i].col(j) - DT[j].col(i);
      M(i, j) = Deta(i, j) - Deta(j, i) - lt.eta(z0, bracket);
    }
  }
  return M;
}

}  // namespace

DEtaOracle d_eta_Z_oracle(const CurvatureField& cf, const TwistorPoint& tp, double tau) {
  const LocalTwistor lt(cf);
  const Eigen::VectorXd z0 = base_point(tp);
  const std::vector<VectorFn> T = lt.basis_fields(vec3(tp.x), true);
  const int d = static_cast<int>(T.size());
  DEtaOracle out;
  out.direct = deta_direct(lt, T, z0);

  const PointFrame fr = cf.connection().frames().at(tp.u);
  const TwistorContext ctx = TwistorContext::from(fr, tp.x, tau);
  const std::vector<TwistorTangent> B = ctx.tangent_basis();
  out.closed = Eigen::MatrixXd(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out.closed(i, j) = d_eta_Z(ctx, B[i], B[j]);
  out.deviation = (out.direct - out.closed).cwiseAbs().maxCoeff();
  const int k = lt.k();
  out.xi23 = out.direct(k + 1, k + 2);
  out.chi_slot = out.direct.row(k).cwiseAbs().maxCoeff();
  return out;
}

CRCheck cr_nijenhuis_residual(const CurvatureField& cf, const TwistorPoint& tp, int sample_pairs, std::uint64_t seed,
                              bool flip_vertical) {
  const LocalTwistor lt(cf, flip_vertical);
  const Eigen::VectorXd z0 = base_point(tp);
  const Eigen::Vector3d x = vec3(tp.x);
  const std::vector<VectorFn> S = lt.basis_fields(x, false);
  const int d = static_cast<int>(S.size());
  const int k = lt.k();

  std::vector<VectorFn> all = S;
  for (const auto& f : S) all.push_back(lt.apply_J(f));
  const std::vector<Eigen::VectorXd> all0 = values(all, z0);
  const std::vector<Eigen::MatrixXd> D = lt.derivatives(all, z0, all0);
  auto bracket = [&](int i, int j) -> Eigen::VectorXd { return D[i].col(j) - D[j].col(i); };

  // Coordinates of a tangent vector at z0 in the D basis, plus its chi component.
  const Eigen::Matrix3d R = gauge_rotation(triple(x));
  auto d_coords = [&](const Eigen::VectorXd& vec) {
    const TwistorTangent t = lt.tangent(z0, vec);
    Eigen::VectorXd c(d + 1);
    c.head(k) = t.baseH;
    const Eigen::Vector3d bv = vec3(t.baseV);
    const Eigen::Vector3d a = vec3(t.vert);
    c(k) = bv.dot(R.col(1));
    c(k + 1) = bv.dot(R.col(2));
    c(k + 2) = a.dot(R.col(1));
    c(k + 3) = a.dot(R.col(2));
    c(d) = bv.dot(R.col(0));
    return c;
  };

  std::vector<std::vector<Eigen::VectorXd>> N(d, std::vector<Eigen::VectorXd>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Eigen::VectorXd mixed = bracket(d + i, j) + bracket(i, d + j);
      N[i][j] = -bracket(i, j) + bracket(d + i, d + j) - lt.J(z0, mixed);
    }
  }

  CRCheck out;
  const Eigen::MatrixXd P = random_pairs(d, sample_pairs, seed);
  for (int p = 0; p < sample_pairs; ++p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(lt.dim());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v += P(i, 2 * p) * P(j, 2 * p + 1) * N[i][j];
    out.nijenhuis = std::max(out.nijenhuis, d_coords(v).head(d).norm());
  }

  // Levi form J-invariance on D from the differenced d eta^Z.
  const Eigen::MatrixXd M = deta_direct(lt, S, z0);
  Eigen::MatrixXd Jm(d, d);
  for (int i = 0; i < d; ++i) Jm.col(i) = d_coords(all0[d + i]).head(d);
  out.levi_invariance = (Jm.transpose() * M * Jm - M).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace qclab
