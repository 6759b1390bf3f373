#include "qclab/chart.hpp"

#include <algorithm>
#include <cmath>

namespace qclab {

std::vector<std::string> default_coords(int n) {
  std::vector<std::string> names;
  for (int a = 1; a <= 4 * n; ++a) names.push_back("x" + std::to_string(a));
  for (int s = 1; s <= 3; ++s) names.push_back("t" + std::to_string(s));
  return names;
}

namespace {

std::string point_string(std::span<const double> u) {
  std::string out = "(";
  char buf[32];
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", u[i]);
    out += (i ? ", " : "");
    out += buf;
  }
  return out + ")";
}

}  // namespace

QCChart::QCChart(std::string name, int n, std::vector<std::string> coords, CoeffTable base,
                 std::optional<expr::Expr> factor, std::vector<Interval> domain)
    : name_(std::move(name)), n_(n), coords_(std::move(coords)), base_(std::move(base)),
      factor_(std::move(factor)), domain_(std::move(domain)) {
  if (n_ < 1 || 4 * n_ + 3 > expr::kMaxVars) {
    fail(ErrorKind::UnsupportedDimension, "quaternionic dimension n=" + std::to_string(n_) + " is not supported (1..4)");
  }
  const int dim = m();
  if (coords_.empty()) coords_ = default_coords(n_);
  if (static_cast<int>(coords_.size()) != dim) {
    fail(ErrorKind::SchemaError, "chart '" + name_ + "' declares " + std::to_string(coords_.size()) +
                                     " coordinates, expected m = 4n+3 = " + std::to_string(dim));
  }
  for (int s = 0; s < 3; ++s) {
    if (static_cast<int>(base_[s].size()) != dim) {
      fail(ErrorKind::SchemaError, "eta" + std::to_string(s + 1) + " has " + std::to_string(base_[s].size()) +
                                       " coefficients, expected " + std::to_string(dim));
    }
    for (const auto& e : base_[s]) {
      if (e.empty() || e.dimension() != dim) fail(ErrorKind::SchemaError, "coefficient dimension mismatch");
    }
  }
  if (factor_ && factor_->dimension() != dim) fail(ErrorKind::SchemaError, "conformal factor dimension mismatch");
  if (!domain_.empty() && static_cast<int>(domain_.size()) != dim) {
    fail(ErrorKind::SchemaError, "domain box must have one interval per coordinate");
  }
  for (const auto& iv : domain_) {
    if (!(iv.lo < iv.hi)) fail(ErrorKind::SchemaError, "domain interval with lo >= hi");
  }
  for (int s = 0; s < 3; ++s) {
    coeffs_[s].reserve(dim);
    for (int r = 0; r < dim; ++r) {
      coeffs_[s].push_back(factor_ ? (*factor_) * base_[s][r] : base_[s][r]);
    }
  }
}

bool QCChart::in_domain(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != m()) return false;
  for (int r = 0; r < m(); ++r) {
    const Interval iv = domain_.empty() ? Interval{} : domain_[r];
    if (!(u[r] >= iv.lo && u[r] <= iv.hi)) return false;
  }
  return true;
}

void QCChart::set_sampling(int samples, std::uint64_t seed) {
  if (samples <= 0) fail(ErrorKind::SchemaError, "sample count must be positive");
  samples_ = samples;
  seed_ = seed;
}

std::vector<std::vector<double>> QCChart::sample_points(int count, std::uint64_t seed, double margin) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(count));
  for (auto& p : pts) {
    p.resize(static_cast<std::size_t>(m()));
    for (int r = 0; r < m(); ++r) {
      const Interval iv = domain_.empty() ? Interval{} : domain_[r];
      const double w = iv.hi - iv.lo;
      p[r] = iv.lo + margin * w + (1.0 - 2.0 * margin) * w * unit(rng);
    }
  }
  return pts;
}

CoframeJet coframe_jet(const QCChart& c, std::span<const double> u) {
  const int m = c.m();
  if (static_cast<int>(u.size()) != m) fail(ErrorKind::SizeMismatch, "point dimension does not match chart");
  CoframeJet jet;
  jet.C.resize(3, m);
  for (int s = 0; s < 3; ++s) {
    // grad(p, q) = d_p c_{sq}
    Eigen::MatrixXd grad(m, m);
    for (int q = 0; q < m; ++q) {
      const expr::Dual d = c.coeff(s, q).eval_dual(u);
      jet.C(s, q) = d.v;
      for (int p = 0; p < m; ++p) grad(p, q) = d.d[p];
    }
    jet.D[s] = grad - grad.transpose();
  }
  return jet;
}

Eigen::MatrixXd eval_coframe(const QCChart& c, std::span<const double> u) {
  const int m = c.m();
  if (static_cast<int>(u.size()) != m) fail(ErrorKind::SizeMismatch, "point dimension does not match chart");
  Eigen::MatrixXd C(3, m);
  for (int s = 0; s < 3; ++s)
    for (int r = 0; r < m; ++r) C(s, r) = c.coeff(s, r).eval(u);
  return C;
}

std::array<Eigen::MatrixXd, 3> eval_dcoframe(const QCChart& c, std::span<const double> u) {
  return coframe_jet(c, u).D;
}

RecoveredStructure recover_structure(const CoframeJet& jet, int n, const Tolerances& tol) {
  const int m = 4 * n + 3;
  const int k = 4 * n;
  if (jet.C.rows() != 3 || jet.C.cols() != m) fail(ErrorKind::SizeMismatch, "coframe matrix must be 3 x (4n+3)");
  RecoveredStructure st;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jet.C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  st.rank_gap = sv(0) > 0.0 ? sv(2) / sv(0) : 0.0;
  if (!(st.rank_gap > 1e-10)) fail(ErrorKind::DegenerateCoframe, "coframe matrix has rank < 3");
  st.N = svd.matrixV().rightCols(k);

  // The map X -> omega_s(X, .) has matrix W_s^T = G I_s in N coordinates.
  std::array<Eigen::PartialPivLU<Eigen::MatrixXd>, 3> inv;
  for (int s = 0; s < 3; ++s) {
    st.W[s] = 0.5 * st.N.transpose() * jet.D[s] * st.N;
    inv[s].compute(st.W[s].transpose());
    if (!(st.W[s].cwiseAbs().maxCoeff() > 0.0) || !(inv[s].rcond() > 1e-10)) {
      fail(ErrorKind::DegenerateLevi, "d eta_" + std::to_string(s + 1) + " is degenerate on H");
    }
  }
  st.I[2] = inv[1].solve(st.W[0].transpose());
  st.I[0] = inv[2].solve(st.W[1].transpose());
  st.I[1] = inv[0].solve(st.W[2].transpose());

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  double q = 0.0;
  for (int s = 0; s < 3; ++s) {
    q = std::max(q, (st.I[s] * st.I[s] + id).cwiseAbs().maxCoeff());
    q = std::max(q, (st.I[s] * st.I[(s + 1) % 3] - st.I[(s + 2) % 3]).cwiseAbs().maxCoeff());
    q = std::max(q, (st.I[(s + 1) % 3] * st.I[s] + st.I[(s + 2) % 3]).cwiseAbs().maxCoeff());
  }
  st.quaternion_residual = q;
  if (!(q <= tol.structure)) {
    fail(ErrorKind::NotQuaternionic, "recovered I_s violate the quaternion relations (residual " + std::to_string(q) + ")");
  }

  const Eigen::MatrixXd G1 = -st.I[0].transpose() * st.W[0];
  st.G = 0.5 * (G1 + G1.transpose());
  for (int s = 1; s < 3; ++s) {
    const Eigen::MatrixXd Gs = -st.I[s].transpose() * st.W[s];
    st.metric_consistency = std::max(st.metric_consistency, (Gs - G1).cwiseAbs().maxCoeff());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(st.G);
  if (llt.info() != Eigen::Success) fail(ErrorKind::NotPositive, "recovered metric on H is not positive definite");

  double levi = 0.0;
  for (int s = 0; s < 3; ++s) levi = std::max(levi, (st.W[s] - st.I[s].transpose() * st.G).cwiseAbs().maxCoeff());
  st.levi_residual = levi;
  if (!(levi <= tol.levi)) {
    fail(ErrorKind::NotQuaternionic, "d eta_s(X,Y) = 2 g(I_s X, Y) fails on H (residual " + std::to_string(levi) + ")");
  }
  return st;
}

RecoveredStructure recover_structure(const QCChart& c, std::span<const double> u, const Tolerances& tol) {
  return recover_structure(coframe_jet(c, u), c.n(), tol);
}

ReebSolution reeb_solve(const CoframeJet& jet, const RecoveredStructure& st, const Tolerances& tol,
                        bool throw_on_failure) {
  const Eigen::MatrixXd& C = jet.C;
  const Eigen::MatrixXd& N = st.N;
  const int k = static_cast<int>(N.cols());

  const Eigen::MatrixXd xi0 = C.transpose() * (C * C.transpose()).inverse();
  std::array<Eigen::MatrixXd, 3> M;   // N^T D_s N
  std::array<Eigen::MatrixXd, 3> DN;  // D_s N
  for (int s = 0; s < 3; ++s) {
    DN[s] = jet.D[s] * N;
    M[s] = N.transpose() * DN[s];
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6 * k, 3 * k);
  Eigen::VectorXd b(6 * k);
  int row = 0;
  for (int s = 0; s < 3; ++s) {
    for (int t = s; t < 3; ++t) {
      for (int j = 0; j < k; ++j, ++row) {
        A.block(row, s * k, 1, k) += M[t].col(j).transpose();
        A.block(row, t * k, 1, k) += M[s].col(j).transpose();
        b(row) = -(xi0.col(s).dot(DN[t].col(j)) + xi0.col(t).dot(DN[s].col(j)));
      }
    }
  }

  // Normal equations via a symmetric eigensolve: singular values are the square
  // roots of the eigenvalues, and the solve is the pseudo-inverse (much cheaper than
  // a Jacobi SVD at this size, and smooth in u as long as the system is well posed).
  const Eigen::MatrixXd AtA = A.transpose() * A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AtA);
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const double cut = lam(lam.size() - 1) * 1e-28;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) > cut) inv(i) = 1.0 / lam(i);
  const Eigen::VectorXd y = es.eigenvectors() * inv.asDiagonal() * (es.eigenvectors().transpose() * (A.transpose() * b));
  ReebSolution out;
  out.residual = (A * y - b).cwiseAbs().maxCoeff();
  out.max_singular = std::sqrt(lam(lam.size() - 1));
  out.min_singular = std::sqrt(lam(0));
  out.xi = xi0;
  for (int s = 0; s < 3; ++s) out.xi.col(s) += N * y.segment(s * k, k);

  if (throw_on_failure) {
    if (!(out.min_singular >= tol.ill_conditioned)) {
      fail(ErrorKind::IllConditioned, "Reeb system is ill-conditioned (smallest singular value " +
                                          std::to_string(out.min_singular) + ")");
    }
    if (!(out.residual <= tol.biquard)) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3e", out.residual);
      fail(ErrorKind::BiquardConditionFail, std::string("Reeb compatibility condition fails (residual ") + buf + ")");
    }
  }
  return out;
}

Eigen::MatrixXd PointFrame::full() const {
  Eigen::MatrixXd F(m(), m());
  F << eH, xi;
  return F;
}

namespace {

struct PointData {
  CoframeJet jet;
  RecoveredStructure st;
  ReebSolution reeb;
};

PointData point_data(const QCChart& c, std::span<const double> u, const Tolerances& tol) {
  try {
    PointData d;
    d.jet = coframe_jet(c, u);
    d.st = recover_structure(d.jet, c.n(), tol);
    d.reeb = reeb_solve(d.jet, d.st, tol);
    return d;
  } catch (const LocatedError&) {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(e.what()) + " at u = " + point_string(u));
  }
}

// Coordinate axes projected to H along V: columns of Id - xi C.
Eigen::MatrixXd axis_candidates(const PointData& d) {
  const Eigen::Index m = d.jet.C.cols();
  return Eigen::MatrixXd::Identity(m, m) - d.reeb.xi * d.jet.C;
}

}  // namespace

FrameField::FrameField(const QCChart& chart, std::span<const double> anchor, const Settings& settings,
                       std::optional<Eigen::MatrixXd> rotation)
    : chart_(chart), settings_(settings), anchor_(anchor.begin(), anchor.end()), rotation_(std::move(rotation)) {
  const int k = 4 * chart_.n();
  if (rotation_ && (rotation_->rows() != k || rotation_->cols() != k)) {
    fail(ErrorKind::SizeMismatch, "frame rotation must be 4n x 4n");
  }
  const PointData d = point_data(chart_, anchor, settings_.tol);
  const Eigen::MatrixXd P = axis_candidates(d);
  const Eigen::MatrixXd p = d.st.N.transpose() * P;
  // Pivoted Cholesky of the g-Gram matrix of the candidates.
  Eigen::MatrixXd gram = p.transpose() * d.st.G * p;
  const int m = chart_.m();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, k);
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  Eigen::VectorXd resid = gram.diagonal();
  for (int step = 0; step < k; ++step) {
    double best = -1.0;
    for (int r = 0; r < m; ++r)
      if (!used[r]) best = std::max(best, resid(r));
    int pick = -1;
    for (int r = 0; r < m; ++r) {
      if (!used[r] && resid(r) >= best * (1.0 - 1e-9)) {
        pick = r;
        break;
      }
    }
    if (pick < 0 || !(resid(pick) > 0.0)) fail(ErrorKind::DegenerateCoframe, "cannot build an H frame from coordinate axes");
    used[pick] = true;
    pivots_.push_back(pick);
    const double piv = std::sqrt(resid(pick));
    for (int r = 0; r < m; ++r) {
      double v = gram(r, pick);
      for (int j = 0; j < step; ++j) v -= L(r, j) * L(pick, j);
      L(r, step) = v / piv;
    }
    for (int r = 0; r < m; ++r) resid(r) -= L(r, step) * L(r, step);
  }
}

PointFrame FrameField::at(std::span<const double> u) const {
  const PointData d = point_data(chart_, u, settings_.tol);
  const int n = chart_.n();
  const int k = 4 * n;
  const Eigen::MatrixXd P = axis_candidates(d);
  Eigen::MatrixXd Psel(P.rows(), k);
  for (int a = 0; a < k; ++a) Psel.col(a) = P.col(pivots_[a]);
  const Eigen::MatrixXd p = d.st.N.transpose() * Psel;
  const Eigen::MatrixXd gram = p.transpose() * d.st.G * p;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::NotPositive, "frame Gram matrix lost positivity at u = " + point_string(u));
  }
  // e = P L^{-T}
  Eigen::MatrixXd eT = llt.matrixL().solve(Psel.transpose());

  PointFrame fr;
  fr.n = n;
  fr.point.assign(u.begin(), u.end());
  fr.eH = eT.transpose();
  if (rotation_) fr.eH = fr.eH * (*rotation_);
  fr.xi = d.reeb.xi;
  fr.bi1_residual = d.reeb.residual;
  fr.reeb_min_singular = d.reeb.min_singular;
  for (int s = 0; s < 3; ++s) {
    const Eigen::MatrixXd omega = 0.5 * fr.eH.transpose() * d.jet.D[s] * fr.eH;
    fr.I[s] = EndoMatrix(n, omega.transpose());
  }
  fr.jet = d.jet;
  return fr;
}

PointFrame frame_field(const QCChart& c, std::span<const double> u, const Settings& settings) {
  return FrameField(c, u, settings).at(u);
}

double FrameCheck::max() const {
  return std::max({eta_on_H, eta_on_xi, orthonormality, levi, quaternion, bi1});
}

FrameCheck check_frame(const QCChart& c, const PointFrame& fr, const Tolerances& tol) {
  FrameCheck out;
  const Eigen::MatrixXd C = eval_coframe(c, fr.point);
  out.eta_on_H = (C * fr.eH).cwiseAbs().maxCoeff();
  out.eta_on_xi = (C * fr.xi - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();

  const CoframeJet jet = coframe_jet(c, fr.point);
  const RecoveredStructure st = recover_structure(jet, c.n(), tol);
  const Eigen::MatrixXd x = st.N.transpose() * fr.eH;
  const int k = 4 * c.n();
  out.orthonormality = (x.transpose() * st.G * x - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  for (int s = 0; s < 3; ++s) {
    const Eigen::MatrixXd lhs = fr.eH.transpose() * jet.D[s] * fr.eH;
    const Eigen::MatrixXd rhs = 2.0 * (st.I[s] * x).transpose() * st.G * x;
    out.levi = std::max(out.levi, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  out.quaternion = quaternion_residual(fr.I);
  for (int s = 0; s < 3; ++s) {
    for (int t = s; t < 3; ++t) {
      const Eigen::RowVectorXd r = fr.xi.col(s).transpose() * jet.D[t] * fr.eH + fr.xi.col(t).transpose() * jet.D[s] * fr.eH;
      out.bi1 = std::max(out.bi1, r.cwiseAbs().maxCoeff());
    }
  }
  return out;
}

}  // namespace qclab
