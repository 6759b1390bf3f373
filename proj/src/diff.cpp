#include "qclab/diff.hpp"

#include "qclab/errors.hpp"

namespace qclab {

const Stencil& central_stencil(int order) {
  static const Stencil second{{-1.0, 1.0}, {-0.5, 0.5}};
  static const Stencil fourth{{-2.0, -1.0, 1.0, 2.0}, {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0}};
  if (order == 2) return second;
  if (order == 4) return fourth;
  fail(ErrorKind::SizeMismatch, "finite-difference order must be 2 or 4");
}

Eigen::VectorXd directional_derivative(const VectorFn& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
                                       double h, int order) {
  const Stencil& st = central_stencil(order);
  Eigen::VectorXd acc;
  for (std::size_t k = 0; k < st.offsets.size(); ++k) {
    Eigen::VectorXd v = f(x + (st.offsets[k] * h) * dir);
    if (k == 0) acc = st.weights[k] * v;
    else acc += st.weights[k] * v;
  }
  return acc / h;
}

Eigen::MatrixXd jacobian(const VectorFn& f, const Eigen::VectorXd& x, double h, int order) {
  Eigen::MatrixXd J;
  for (Eigen::Index r = 0; r < x.size(); ++r) {
    Eigen::VectorXd dir = Eigen::VectorXd::Unit(x.size(), r);
    Eigen::VectorXd col = directional_derivative(f, x, dir, h, order);
    if (r == 0) J.resize(col.size(), x.size());
    J.col(r) = col;
  }
  return J;
}

Eigen::VectorXd lie_bracket(const VectorFn& X, const VectorFn& Y, const Eigen::VectorXd& u, double h, int order) {
  const Eigen::VectorXd xu = X(u);
  const Eigen::VectorXd yu = Y(u);
  // Directional derivatives avoid forming full Jacobians.
  return directional_derivative(Y, u, xu, h, order) - directional_derivative(X, u, yu, h, order);
}

}  // namespace qclab
