#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

// Central finite differences of vector-valued functions.

namespace qclab {

struct Stencil {
  std::vector<double> offsets;  // in units of h
  std::vector<double> weights;  // derivative ~ sum_k w_k f(x + o_k h) / h
};

// order 2 or 4; anything else throws SizeMismatch.
const Stencil& central_stencil(int order);

using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// d/dt f(x + t dir) at t = 0.
Eigen::VectorXd directional_derivative(const VectorFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
                                       double h, int order);

// Column r holds the partial derivative along coordinate r.
Eigen::MatrixXd jacobian(const VectorFn& f, const Eigen::VectorXd& x, double h, int order);

// [X, Y] = (DY) X - (DX) Y with both Jacobians by central differences.
Eigen::VectorXd lie_bracket(const VectorFn& X, const VectorFn& Y, const Eigen::VectorXd& u, double h, int order);

inline Eigen::VectorXd to_vector(std::span<const double> u) {
  return Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
}

}  // namespace qclab
