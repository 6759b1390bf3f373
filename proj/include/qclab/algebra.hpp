#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "qclab/errors.hpp"

// Endomorphisms of a 4n-dimensional Euclidean space, quaternion triples and
// the Sp(n)Sp(1)-invariant projections. All matrices are expressed in
// g-orthonormal frames, so transpose is the metric adjoint.

namespace qclab {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class EndoMatrix {
 public:
  EndoMatrix() = default;
  // Zero endomorphism of R^{4n}.
  explicit EndoMatrix(int n);
  EndoMatrix(int n, RowMatrix m);

  static EndoMatrix identity(int n);
  // Throws SizeMismatch unless m is square of order divisible by 4.
  static EndoMatrix from_matrix(const Eigen::MatrixXd& m);

  int n() const { return n_; }
  int dim() const { return 4 * n_; }

  double& operator()(int r, int c) { return m_(r, c); }
  double operator()(int r, int c) const { return m_(r, c); }

  const RowMatrix& mat() const { return m_; }
  RowMatrix& mat() { return m_; }
  std::span<const double> data() const { return {m_.data(), static_cast<std::size_t>(m_.size())}; }
  std::span<double> data() { return {m_.data(), static_cast<std::size_t>(m_.size())}; }

  EndoMatrix transpose() const;
  EndoMatrix sym() const;   // (M + M^T)/2
  EndoMatrix skew() const;  // (M - M^T)/2
  double trace() const { return m_.trace(); }
  double max_abs() const;
  double frobenius() const;
  bool all_finite() const { return m_.allFinite(); }

  EndoMatrix& operator+=(const EndoMatrix& o);
  EndoMatrix& operator-=(const EndoMatrix& o);
  EndoMatrix& operator*=(double s);

 private:
  int n_ = 0;
  RowMatrix m_;
};

EndoMatrix operator+(EndoMatrix a, const EndoMatrix& b);
EndoMatrix operator-(EndoMatrix a, const EndoMatrix& b);
EndoMatrix operator-(EndoMatrix a);
EndoMatrix operator*(double s, EndoMatrix a);
EndoMatrix operator*(const EndoMatrix& a, const EndoMatrix& b);
// a^T b
EndoMatrix transpose_times(const EndoMatrix& a, const EndoMatrix& b);
// ab - ba
EndoMatrix commutator(const EndoMatrix& a, const EndoMatrix& b);

struct QuaternionTriple {
  std::array<EndoMatrix, 3> I;
  const EndoMatrix& operator[](int s) const { return I[s]; }
  EndoMatrix& operator[](int s) { return I[s]; }
  int n() const { return I[0].n(); }
};

// Left multiplication by i, j, k on H^n = R^{4n}, block diagonal.
QuaternionTriple standard_triple(int n);

// Largest residual among I_s^2 = -Id, I1 I2 = I3 = -I2 I1 (and cyclic),
// skewness, orthogonality and <I_s, I_t> = delta_st.
double quaternion_residual(const QuaternionTriple& t);

struct FourPartSplit {
  EndoMatrix p_ppp, p_pmm, p_mpm, p_mmp;
};

using VTriple = std::array<double, 3>;

// (1/4n) tr(A^T B)
double endo_inner(const EndoMatrix& a, const EndoMatrix& b);

FourPartSplit four_part_decompose(const EndoMatrix& psi, const QuaternionTriple& t);
// Largest residual of the commutation/anticommutation sign pattern.
double four_part_sign_residual(const FourPartSplit& parts, const QuaternionTriple& t);

VTriple project_sp1(const EndoMatrix& psi, const QuaternionTriple& t);
EndoMatrix sp1_part(const EndoMatrix& psi, const QuaternionTriple& t);
EndoMatrix project_P(const EndoMatrix& psi, const QuaternionTriple& t);
EndoMatrix project_torsion_space(const EndoMatrix& psi, const QuaternionTriple& t);

VTriple v_cross(const VTriple& a, const VTriple& b);
double v_dot(const VTriple& a, const VTriple& b);

}  // namespace qclab
