#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qclab/algebra.hpp"
#include "qclab/expr.hpp"
#include "qclab/tolerances.hpp"

// A QC structure on a coordinate box, given by three coframe 1-forms
// eta_s = sum_r c_{sr}(u) du^r, and the point-level constructions built on it.
// Exterior derivative convention: (d eta_s)_{rq} = d_r c_{sq} - d_q c_{sr}.

namespace qclab {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

using CoeffTable = std::array<std::vector<expr::Expr>, 3>;

// x1..x4n, t1, t2, t3.
std::vector<std::string> default_coords(int n);

class QCChart {
 public:
  QCChart() = default;
  // base[s][r] are the undeformed coefficients; factor (if any) multiplies all of them.
  QCChart(std::string name, int n, std::vector<std::string> coords, CoeffTable base,
          std::optional<expr::Expr> factor = std::nullopt, std::vector<Interval> domain = {});

  int n() const { return n_; }
  int m() const { return 4 * n_ + 3; }
  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  void set_description(std::string d) { description_ = std::move(d); }
  const std::vector<std::string>& coords() const { return coords_; }

  const expr::Expr& coeff(int s, int r) const { return coeffs_[s][r]; }
  const expr::Expr& base_coeff(int s, int r) const { return base_[s][r]; }
  const CoeffTable& base_coeffs() const { return base_; }
  const std::optional<expr::Expr>& factor() const { return factor_; }

  // Missing domain means [-1, 1]^m.
  const std::vector<Interval>& domain() const { return domain_; }
  bool in_domain(std::span<const double> u) const;

  int samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }
  void set_sampling(int samples, std::uint64_t seed);

  std::vector<double> origin() const { return std::vector<double>(static_cast<std::size_t>(m()), 0.0); }
  // Uniform points in the domain box shrunk by margin on each side.
  std::vector<std::vector<double>> sample_points(int count, std::uint64_t seed, double margin = 0.05) const;

 private:
  std::string name_;
  std::string description_;
  int n_ = 0;
  std::vector<std::string> coords_;
  CoeffTable base_;
  CoeffTable coeffs_;
  std::optional<expr::Expr> factor_;
  std::vector<Interval> domain_;
  int samples_ = 20;
  std::uint64_t seed_ = 1;
};

// Coframe values C (3 x m) and exterior derivatives D_s (m x m, skew), from exact AD.
struct CoframeJet {
  Eigen::MatrixXd C;
  std::array<Eigen::MatrixXd, 3> D;
};

CoframeJet coframe_jet(const QCChart& c, std::span<const double> u);
Eigen::MatrixXd eval_coframe(const QCChart& c, std::span<const double> u);
std::array<Eigen::MatrixXd, 3> eval_dcoframe(const QCChart& c, std::span<const double> u);

// Metric and quaternionic structure on H_p, expressed in an orthonormal
// (Euclidean) basis N of the null space of the coframe.
struct RecoveredStructure {
  Eigen::MatrixXd N;                 // m x 4n
  Eigen::MatrixXd G;                 // metric in N coordinates
  std::array<Eigen::MatrixXd, 3> I;  // I_s in N coordinates
  std::array<Eigen::MatrixXd, 3> W;  // omega_s = (1/2) d eta_s restricted to H
  double rank_gap = 0.0;             // sigma_3 / sigma_1 of the coframe matrix
  double quaternion_residual = 0.0;
  double levi_residual = 0.0;        // max_s |omega_s - g(I_s ., .)|
  double metric_consistency = 0.0;   // g from s = 1 versus s = 2, 3
};

RecoveredStructure recover_structure(const CoframeJet& jet, int n, const Tolerances& tol = {});
RecoveredStructure recover_structure(const QCChart& c, std::span<const double> u, const Tolerances& tol = {});

struct ReebSolution {
  Eigen::MatrixXd xi;      // m x 3
  double residual = 0.0;   // max abs residual of the compatibility system
  double min_singular = 0.0;
  double max_singular = 0.0;
};

// Reeb fields satisfying eta_t(xi_s) = delta_ts and the compatibility
// d eta_t(xi_s, X) + d eta_s(xi_t, X) = 0 on H, by least squares.
ReebSolution reeb_solve(const CoframeJet& jet, const RecoveredStructure& st, const Tolerances& tol = {},
                        bool throw_on_failure = true);

struct PointFrame {
  int n = 0;
  std::vector<double> point;
  Eigen::MatrixXd eH;  // m x 4n, g-orthonormal basis of H
  Eigen::MatrixXd xi;  // m x 3
  QuaternionTriple I;  // (I_s)_{ba} = g(I_s e_a, e_b)
  double bi1_residual = 0.0;
  double reeb_min_singular = 0.0;
  CoframeJet jet;

  int m() const { return 4 * n + 3; }
  // [eH | xi], m x m
  Eigen::MatrixXd full() const;
};

// Frame field near an anchor point. The Gram-Schmidt pivot order is fixed at
// the anchor so that the frame is smooth in a neighbourhood.
// Candidates are the coordinate axes projected to H along V. Pivot rule: at
// each step take the candidate with the largest g-norm residual after removing
// the span of those already chosen; candidates within a relative 1e-9 of the
// maximum count as ties and the lowest coordinate index wins.
class FrameField {
 public:
  FrameField(const QCChart& chart, std::span<const double> anchor, const Settings& settings = {},
             std::optional<Eigen::MatrixXd> rotation = std::nullopt);

  PointFrame at(std::span<const double> u) const;
  PointFrame at(const Eigen::VectorXd& u) const { return at(std::span<const double>(u.data(), u.size())); }

  const QCChart& chart() const { return chart_; }
  const Settings& settings() const { return settings_; }
  const std::vector<int>& pivots() const { return pivots_; }
  const std::vector<double>& anchor() const { return anchor_; }
  const std::optional<Eigen::MatrixXd>& rotation() const { return rotation_; }

 private:
  QCChart chart_;
  Settings settings_;
  std::vector<double> anchor_;
  std::vector<int> pivots_;
  std::optional<Eigen::MatrixXd> rotation_;
};

PointFrame frame_field(const QCChart& c, std::span<const double> u, const Settings& settings = {});

// Independent re-check of the PointFrame invariants against the chart data.
struct FrameCheck {
  double eta_on_H = 0.0;       // |eta_s(e_a)|
  double eta_on_xi = 0.0;      // |eta_t(xi_s) - delta_ts|
  double orthonormality = 0.0; // |g(e_a, e_b) - delta_ab| with g recovered afresh
  double levi = 0.0;           // |d eta_s(e_a, e_b) - 2 g(I_s e_a, e_b)| with I_s recovered afresh
  double quaternion = 0.0;     // relations of the frame matrices
  double bi1 = 0.0;
  double max() const;
};

FrameCheck check_frame(const QCChart& c, const PointFrame& fr, const Tolerances& tol = {});

}  // namespace qclab
