#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qclab/errors.hpp"

// Scalar field expressions over chart coordinates u1..um:
// literals, + - * / ^, unary minus, sin cos exp log sqrt tanh.
// Values and exact first derivatives (forward-mode dual numbers).

namespace qclab::expr {

// Charts support n <= 4, so m = 4n + 3 <= 19.
inline constexpr int kMaxVars = 19;

struct Dual {
  double v = 0.0;
  std::array<double, kMaxVars> d{};
};

struct Node;

class Expr {
 public:
  Expr() = default;

  static Expr constant(double value, int m);
  static Expr variable(int index, int m);  // 0-based

  int dimension() const;
  bool empty() const { return impl_ == nullptr; }
  bool is_constant() const;

  double eval(std::span<const double> point) const;
  Dual eval_dual(std::span<const double> point) const;
  std::vector<double> grad(std::span<const double> point) const;

  // Fully parenthesized text using u1..um; parse(print(e), m) reproduces e.
  std::string print() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  struct Impl;

 private:
  explicit Expr(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  static Expr from_node(std::shared_ptr<const Node> root, int m);
  std::shared_ptr<const Impl> impl_;

  friend Expr parse(std::string_view, int, std::span<const std::string>);
};

// aliases[k] names coordinate k (0-based) in addition to u{k+1}.
Expr parse(std::string_view text, int m, std::span<const std::string> aliases = {});

}  // namespace qclab::expr
