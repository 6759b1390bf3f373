#include "qclab/algebra.hpp"

#include <cmath>
#include <string>

#include "qclab/simd/kernels.hpp"

namespace qclab {

std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorKind::DimensionExceeded: return "DimensionExceeded";
    case ErrorKind::EvalDomainError: return "EvalDomainError";
    case ErrorKind::DegenerateCoframe: return "DegenerateCoframe";
    case ErrorKind::DegenerateLevi: return "DegenerateLevi";
    case ErrorKind::NotQuaternionic: return "NotQuaternionic";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::BiquardConditionFail: return "BiquardConditionFail";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::QPreservationFail: return "QPreservationFail";
    case ErrorKind::TorsionStructureFail: return "TorsionStructureFail";
    case ErrorKind::StepTooSmall: return "StepTooSmall";
    case ErrorKind::NonPositiveFactor: return "NonPositiveFactor";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

void require_same(const EndoMatrix& a, const EndoMatrix& b) {
  if (a.n() != b.n()) {
    fail(ErrorKind::SizeMismatch,
         "endomorphism size mismatch: n=" + std::to_string(a.n()) + " vs n=" + std::to_string(b.n()));
  }
}

void require_same(const EndoMatrix& a, const QuaternionTriple& t) {
  for (const auto& i : t.I) require_same(a, i);
}

// I psi I
EndoMatrix sandwich(const EndoMatrix& i, const EndoMatrix& psi) { return i * (psi * i); }

}  // namespace

EndoMatrix::EndoMatrix(int n) : n_(n), m_(RowMatrix::Zero(4 * n, 4 * n)) {
  if (n <= 0) fail(ErrorKind::SizeMismatch, "quaternionic dimension must be positive");
}

EndoMatrix::EndoMatrix(int n, RowMatrix m) : n_(n), m_(std::move(m)) {
  if (n <= 0 || m_.rows() != 4 * n || m_.cols() != 4 * n) {
    fail(ErrorKind::SizeMismatch, "matrix is not 4n x 4n for n=" + std::to_string(n));
  }
}

EndoMatrix EndoMatrix::identity(int n) {
  EndoMatrix e(n);
  e.m_.setIdentity();
  return e;
}

EndoMatrix EndoMatrix::from_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 4 != 0) {
    fail(ErrorKind::SizeMismatch, "endomorphism must be square with order divisible by 4");
  }
  return EndoMatrix(static_cast<int>(m.rows() / 4), RowMatrix(m));
}

EndoMatrix EndoMatrix::transpose() const { return EndoMatrix(n_, m_.transpose()); }
EndoMatrix EndoMatrix::sym() const { return EndoMatrix(n_, 0.5 * (m_ + m_.transpose())); }
EndoMatrix EndoMatrix::skew() const { return EndoMatrix(n_, 0.5 * (m_ - m_.transpose())); }
double EndoMatrix::max_abs() const { return m_.size() ? m_.cwiseAbs().maxCoeff() : 0.0; }
double EndoMatrix::frobenius() const {
  auto d = data();
  return std::sqrt(simd::dot(d.data(), d.data(), d.size()));
}

EndoMatrix& EndoMatrix::operator+=(const EndoMatrix& o) {
  require_same(*this, o);
  simd::axpby(1.0, o.m_.data(), 1.0, m_.data(), static_cast<std::size_t>(m_.size()));
  return *this;
}

EndoMatrix& EndoMatrix::operator-=(const EndoMatrix& o) {
  require_same(*this, o);
  simd::axpby(-1.0, o.m_.data(), 1.0, m_.data(), static_cast<std::size_t>(m_.size()));
  return *this;
}

EndoMatrix& EndoMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

EndoMatrix operator+(EndoMatrix a, const EndoMatrix& b) { return a += b; }
EndoMatrix operator-(EndoMatrix a, const EndoMatrix& b) { return a -= b; }
EndoMatrix operator-(EndoMatrix a) { return a *= -1.0; }
EndoMatrix operator*(double s, EndoMatrix a) { return a *= s; }

EndoMatrix operator*(const EndoMatrix& a, const EndoMatrix& b) {
  require_same(a, b);
  EndoMatrix c(a.n());
  simd::gemm(a.mat().data(), b.mat().data(), c.mat().data(), static_cast<std::size_t>(a.dim()));
  return c;
}

EndoMatrix transpose_times(const EndoMatrix& a, const EndoMatrix& b) {
  require_same(a, b);
  EndoMatrix c(a.n());
  simd::gemm_tn(a.mat().data(), b.mat().data(), c.mat().data(), static_cast<std::size_t>(a.dim()));
  return c;
}

EndoMatrix commutator(const EndoMatrix& a, const EndoMatrix& b) { return a * b - b * a; }

QuaternionTriple standard_triple(int n) {
  // Columns are images of the basis (1, i, j, k) under left multiplication.
  const double li[4][4] = {{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}, {0, 0, 1, 0}};
  const double lj[4][4] = {{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}};
  const double lk[4][4] = {{0, 0, 0, -1}, {0, 0, -1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}};
  QuaternionTriple t{{EndoMatrix(n), EndoMatrix(n), EndoMatrix(n)}};
  for (int blk = 0; blk < n; ++blk) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        t[0](4 * blk + r, 4 * blk + c) = li[r][c];
        t[1](4 * blk + r, 4 * blk + c) = lj[r][c];
        t[2](4 * blk + r, 4 * blk + c) = lk[r][c];
      }
    }
  }
  return t;
}

double quaternion_residual(const QuaternionTriple& t) {
  const int n = t.n();
  const EndoMatrix id = EndoMatrix::identity(n);
  double r = 0.0;
  for (int s = 0; s < 3; ++s) {
    const EndoMatrix& a = t[s];
    const EndoMatrix& b = t[(s + 1) % 3];
    const EndoMatrix& c = t[(s + 2) % 3];
    r = std::max(r, (a * a + id).max_abs());
    r = std::max(r, (a * b - c).max_abs());
    r = std::max(r, (b * a + c).max_abs());
    r = std::max(r, (a + a.transpose()).max_abs());
    r = std::max(r, (transpose_times(a, a) - id).max_abs());
    r = std::max(r, std::abs(endo_inner(a, a) - 1.0));
    r = std::max(r, std::abs(endo_inner(a, b)));
  }
  return r;
}

double endo_inner(const EndoMatrix& a, const EndoMatrix& b) {
  require_same(a, b);
  // tr(A^T B) is the Frobenius product of the entry arrays.
  auto da = a.data();
  auto db = b.data();
  return simd::dot(da.data(), db.data(), da.size()) / a.dim();
}

FourPartSplit four_part_decompose(const EndoMatrix& psi, const QuaternionTriple& t) {
  require_same(psi, t);
  const EndoMatrix s1 = sandwich(t[0], psi);
  const EndoMatrix s2 = sandwich(t[1], psi);
  const EndoMatrix s3 = sandwich(t[2], psi);
  FourPartSplit out;
  out.p_ppp = 0.25 * (psi - s1 - s2 - s3);
  out.p_pmm = 0.25 * (psi - s1 + s2 + s3);
  out.p_mpm = 0.25 * (psi + s1 - s2 + s3);
  out.p_mmp = 0.25 * (psi + s1 + s2 - s3);
  return out;
}

double four_part_sign_residual(const FourPartSplit& p, const QuaternionTriple& t) {
  // sign[k][s] = +1 when part k commutes with I_s, -1 when it anticommutes.
  const std::array<const EndoMatrix*, 4> parts{&p.p_ppp, &p.p_pmm, &p.p_mpm, &p.p_mmp};
  const int sign[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  double r = 0.0;
  for (int k = 0; k < 4; ++k) {
    for (int s = 0; s < 3; ++s) {
      const EndoMatrix lhs = (*parts[k]) * t[s];
      const EndoMatrix rhs = t[s] * (*parts[k]);
      r = std::max(r, (sign[k][s] > 0 ? lhs - rhs : lhs + rhs).max_abs());
    }
  }
  return r;
}

VTriple project_sp1(const EndoMatrix& psi, const QuaternionTriple& t) {
  require_same(psi, t);
  return {endo_inner(psi, t[0]), endo_inner(psi, t[1]), endo_inner(psi, t[2])};
}

EndoMatrix sp1_part(const EndoMatrix& psi, const QuaternionTriple& t) {
  const VTriple a = project_sp1(psi, t);
  EndoMatrix out(psi.n());
  for (int s = 0; s < 3; ++s) {
    simd::axpby(a[s], t[s].mat().data(), 1.0, out.mat().data(), static_cast<std::size_t>(out.mat().size()));
  }
  return out;
}

EndoMatrix project_P(const EndoMatrix& psi, const QuaternionTriple& t) {
  require_same(psi, t);
  return four_part_decompose(psi.skew(), t).p_ppp;
}

EndoMatrix project_torsion_space(const EndoMatrix& psi, const QuaternionTriple& t) {
  return psi - project_P(psi, t) - sp1_part(psi, t);
}

VTriple v_cross(const VTriple& a, const VTriple& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double v_dot(const VTriple& a, const VTriple& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace qclab
