#include "qclab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <type_traits>

namespace qclab::expr {

enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Tanh };

struct Node {
  Op op;
  double value = 0.0;
  int var = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(int k) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = k;
  return n;
}

const char* func_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Tanh: return "tanh";
    default: return nullptr;
  }
}

std::optional<Op> func_from_name(std::string_view s) {
  if (s == "sin") return Op::Sin;
  if (s == "cos") return Op::Cos;
  if (s == "exp") return Op::Exp;
  if (s == "log") return Op::Log;
  if (s == "sqrt") return Op::Sqrt;
  if (s == "tanh") return Op::Tanh;
  return std::nullopt;
}

bool has_variables(const Node& n) {
  if (n.op == Op::Var) return true;
  return (n.a && has_variables(*n.a)) || (n.b && has_variables(*n.b));
}

// Constant subtrees only; used to detect integer exponents.
double fold(const Node& n) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Add: return fold(*n.a) + fold(*n.b);
    case Op::Sub: return fold(*n.a) - fold(*n.b);
    case Op::Mul: return fold(*n.a) * fold(*n.b);
    case Op::Div: return fold(*n.a) / fold(*n.b);
    case Op::Pow: return std::pow(fold(*n.a), fold(*n.b));
    case Op::Neg: return -fold(*n.a);
    case Op::Sin: return std::sin(fold(*n.a));
    case Op::Cos: return std::cos(fold(*n.a));
    case Op::Exp: return std::exp(fold(*n.a));
    case Op::Log: return std::log(fold(*n.a));
    case Op::Sqrt: return std::sqrt(fold(*n.a));
    case Op::Tanh: return std::tanh(fold(*n.a));
    case Op::Var: break;
  }
  return std::nan("");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Const:
      if (n.value < 0 || std::signbit(n.value)) {
        out += "(-" + format_double(-n.value) + ")";
      } else {
        out += format_double(n.value);
      }
      return;
    case Op::Var:
      out += "u" + std::to_string(n.var + 1);
      return;
    case Op::Neg:
      out += "(-";
      print_node(*n.a, out);
      out += ")";
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow: {
      const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * "
                      : n.op == Op::Div ? " / " : " ^ ";
      out += "(";
      print_node(*n.a, out);
      out += sym;
      print_node(*n.b, out);
      out += ")";
      return;
    }
    default:
      out += func_name(n.op);
      out += "(";
      print_node(*n.a, out);
      out += ")";
      return;
  }
}

// Postfix program.
enum class Code { Const, Var, Add, Sub, Mul, Div, PowInt, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Tanh };

struct Instr {
  Code code;
  double c = 0.0;
  int k = 0;
};

void compile(const Node& n, std::vector<Instr>& prog, int& depth, int& max_depth) {
  auto push = [&](Instr in, int delta) {
    prog.push_back(in);
    depth += delta;
    max_depth = std::max(max_depth, depth);
  };
  switch (n.op) {
    case Op::Const: push({Code::Const, n.value, 0}, 1); return;
    case Op::Var: push({Code::Var, 0.0, n.var}, 1); return;
    case Op::Pow:
      if (!has_variables(*n.b)) {
        const double e = fold(*n.b);
        if (std::isfinite(e) && e == std::round(e) && std::abs(e) <= 1024) {
          compile(*n.a, prog, depth, max_depth);
          push({Code::PowInt, 0.0, static_cast<int>(e)}, 0);
          return;
        }
      }
      compile(*n.a, prog, depth, max_depth);
      compile(*n.b, prog, depth, max_depth);
      push({Code::Pow}, -1);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      compile(*n.a, prog, depth, max_depth);
      compile(*n.b, prog, depth, max_depth);
      const Code c = n.op == Op::Add ? Code::Add : n.op == Op::Sub ? Code::Sub : n.op == Op::Mul ? Code::Mul : Code::Div;
      push({c}, -1);
      return;
    }
    case Op::Neg: compile(*n.a, prog, depth, max_depth); push({Code::Neg}, 0); return;
    case Op::Sin: compile(*n.a, prog, depth, max_depth); push({Code::Sin}, 0); return;
    case Op::Cos: compile(*n.a, prog, depth, max_depth); push({Code::Cos}, 0); return;
    case Op::Exp: compile(*n.a, prog, depth, max_depth); push({Code::Exp}, 0); return;
    case Op::Log: compile(*n.a, prog, depth, max_depth); push({Code::Log}, 0); return;
    case Op::Sqrt: compile(*n.a, prog, depth, max_depth); push({Code::Sqrt}, 0); return;
    case Op::Tanh: compile(*n.a, prog, depth, max_depth); push({Code::Tanh}, 0); return;
  }
}

[[noreturn]] void domain_error(const std::string& what) { fail(ErrorKind::EvalDomainError, what); }

// Arithmetic on a value type that is either double or Dual (with m active partials).
struct RealOps {
  using T = double;
  int m;
  T constant(double c) const { return c; }
  T var(std::span<const double> p, int k) const { return p[k]; }
  static double val(const T& x) { return x; }
  T add(const T& a, const T& b) const { return a + b; }
  T sub(const T& a, const T& b) const { return a - b; }
  T mul(const T& a, const T& b) const { return a * b; }
  T div(const T& a, const T& b) const { return a / b; }
  T neg(const T& a) const { return -a; }
  // f(a) with derivative df at a.
  T chain(const T&, double f, double) const { return f; }
};

struct DualOps {
  using T = Dual;
  int m;
  T constant(double c) const {
    T r;
    r.v = c;
    return r;
  }
  T var(std::span<const double> p, int k) const {
    T r;
    r.v = p[k];
    r.d[k] = 1.0;
    return r;
  }
  static double val(const T& x) { return x.v; }
  T add(const T& a, const T& b) const {
    T r;
    r.v = a.v + b.v;
    for (int i = 0; i < m; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
  }
  T sub(const T& a, const T& b) const {
    T r;
    r.v = a.v - b.v;
    for (int i = 0; i < m; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
  }
  T mul(const T& a, const T& b) const {
    T r;
    r.v = a.v * b.v;
    for (int i = 0; i < m; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  T div(const T& a, const T& b) const {
    T r;
    r.v = a.v / b.v;
    const double inv = 1.0 / b.v;
    for (int i = 0; i < m; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }
  T neg(const T& a) const {
    T r;
    r.v = -a.v;
    for (int i = 0; i < m; ++i) r.d[i] = -a.d[i];
    return r;
  }
  T chain(const T& a, double f, double df) const {
    T r;
    r.v = f;
    for (int i = 0; i < m; ++i) r.d[i] = df * a.d[i];
    return r;
  }
};

template <class Ops>
typename Ops::T pow_int(const Ops& ops, typename Ops::T base, int k) {
  if (k == 0) return ops.constant(1.0);
  const bool invert = k < 0;
  unsigned e = static_cast<unsigned>(invert ? -k : k);
  typename Ops::T acc = base;
  for (unsigned i = 1; i < e; ++i) acc = ops.mul(acc, base);
  if (invert) {
    if (Ops::val(acc) == 0.0) domain_error("negative integer power of zero");
    acc = ops.div(ops.constant(1.0), acc);
  }
  return acc;
}

template <class Ops>
typename Ops::T run(const std::vector<Instr>& prog, int max_depth, const Ops& ops, std::span<const double> p) {
  using T = typename Ops::T;
  std::vector<T> st;
  st.reserve(static_cast<std::size_t>(max_depth));
  for (const Instr& in : prog) {
    switch (in.code) {
      case Code::Const: st.push_back(ops.constant(in.c)); break;
      case Code::Var: st.push_back(ops.var(p, in.k)); break;
      case Code::Add: { T b = st.back(); st.pop_back(); st.back() = ops.add(st.back(), b); break; }
      case Code::Sub: { T b = st.back(); st.pop_back(); st.back() = ops.sub(st.back(), b); break; }
      case Code::Mul: { T b = st.back(); st.pop_back(); st.back() = ops.mul(st.back(), b); break; }
      case Code::Div: {
        T b = st.back();
        st.pop_back();
        if (Ops::val(b) == 0.0) domain_error("division by zero");
        st.back() = ops.div(st.back(), b);
        break;
      }
      case Code::PowInt: st.back() = pow_int(ops, st.back(), in.k); break;
      case Code::Pow: {
        T b = st.back();
        st.pop_back();
        T& a = st.back();
        const double av = Ops::val(a);
        if (!(av > 0.0)) domain_error("real power of a non-positive base");
        const double lg = std::log(av);
        T la = ops.chain(a, lg, 1.0 / av);
        T prod = ops.mul(b, la);
        const double ev = std::exp(Ops::val(prod));
        a = ops.chain(prod, ev, ev);
        break;
      }
      case Code::Neg: st.back() = ops.neg(st.back()); break;
      case Code::Sin: {
        const double x = Ops::val(st.back());
        st.back() = ops.chain(st.back(), std::sin(x), std::cos(x));
        break;
      }
      case Code::Cos: {
        const double x = Ops::val(st.back());
        st.back() = ops.chain(st.back(), std::cos(x), -std::sin(x));
        break;
      }
      case Code::Exp: {
        const double e = std::exp(Ops::val(st.back()));
        st.back() = ops.chain(st.back(), e, e);
        break;
      }
      case Code::Log: {
        const double x = Ops::val(st.back());
        if (!(x > 0.0)) domain_error("log of a non-positive value");
        st.back() = ops.chain(st.back(), std::log(x), 1.0 / x);
        break;
      }
      case Code::Sqrt: {
        const double x = Ops::val(st.back());
        if (x < 0.0) domain_error("sqrt of a negative value");
        const double s = std::sqrt(x);
        if constexpr (std::is_same_v<T, Dual>) {
          if (s == 0.0) domain_error("sqrt is not differentiable at zero");
          st.back() = ops.chain(st.back(), s, 0.5 / s);
        } else {
          st.back() = s;
        }
        break;
      }
      case Code::Tanh: {
        const double t = std::tanh(Ops::val(st.back()));
        st.back() = ops.chain(st.back(), t, 1.0 - t * t);
        break;
      }
    }
    if (!std::isfinite(Ops::val(st.back()))) domain_error("non-finite intermediate value");
  }
  return st.back();
}

// Recursive-descent parser. Precedence: ^ > unary minus > * / > + -.
class Parser {
 public:
  Parser(std::string_view text, int m, std::span<const std::string> aliases)
      : s_(text), m_(m), aliases_(aliases) {}

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) error("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) {
    throw LocatedError(ErrorKind::SyntaxError, "syntax error at byte " + std::to_string(pos_) + ": " + what, pos_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, lhs, parse_term());
      else if (accept('-')) lhs = make(Op::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, lhs, parse_unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Op::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(Op::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) error("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = parse_expr();
      if (!accept(')')) error("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    error("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) {
      pos_ = start;
      error("malformed number");
    }
    return make_const(v);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (auto f = func_from_name(id)) {
      if (!accept('(')) error("expected '(' after function name");
      NodePtr arg = parse_expr();
      if (!accept(')')) error("expected ')'");
      return make(*f, arg);
    }
    for (std::size_t k = 0; k < aliases_.size(); ++k) {
      if (aliases_[k] == id) return make_var(static_cast<int>(k));
    }
    if (id.size() >= 2 && id[0] == 'u' && id[1] != '0') {
      int k = 0;
      const auto res = std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (res.ec == std::errc() && res.ptr == id.data() + id.size() && k >= 1) {
        if (k > m_) {
          throw LocatedError(ErrorKind::DimensionExceeded,
                             "variable " + std::string(id) + " exceeds chart dimension " + std::to_string(m_), start);
        }
        return make_var(k - 1);
      }
    }
    throw LocatedError(ErrorKind::UnknownIdentifier, "unknown identifier '" + std::string(id) + "' at byte " +
                                                         std::to_string(start), start);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int m_;
  std::span<const std::string> aliases_;
};

}  // namespace

struct Expr::Impl {
  NodePtr root;
  int m = 0;
  std::vector<Instr> prog;
  int max_depth = 0;
  bool constant = false;
};

Expr Expr::from_node(std::shared_ptr<const Node> root, int m) {
  if (m <= 0 || m > kMaxVars) fail(ErrorKind::DimensionExceeded, "expression dimension out of range");
  auto impl = std::make_shared<Impl>();
  impl->root = std::move(root);
  impl->m = m;
  int depth = 0;
  compile(*impl->root, impl->prog, depth, impl->max_depth);
  impl->constant = !has_variables(*impl->root);
  return Expr(std::move(impl));
}

Expr Expr::constant(double value, int m) { return from_node(make_const(value), m); }

Expr Expr::variable(int index, int m) {
  if (index < 0 || index >= m) fail(ErrorKind::DimensionExceeded, "variable index out of range");
  return from_node(make_var(index), m);
}

int Expr::dimension() const { return impl_ ? impl_->m : 0; }
bool Expr::is_constant() const { return impl_ && impl_->constant; }

namespace {
void check_point(const Expr& e, std::span<const double> p) {
  if (e.empty()) fail(ErrorKind::SizeMismatch, "empty expression");
  if (static_cast<int>(p.size()) != e.dimension()) {
    fail(ErrorKind::SizeMismatch, "point has " + std::to_string(p.size()) + " coordinates, expected " +
                                      std::to_string(e.dimension()));
  }
}
}  // namespace

double Expr::eval(std::span<const double> point) const {
  check_point(*this, point);
  return run(impl_->prog, impl_->max_depth, RealOps{impl_->m}, point);
}

Dual Expr::eval_dual(std::span<const double> point) const {
  check_point(*this, point);
  return run(impl_->prog, impl_->max_depth, DualOps{impl_->m}, point);
}

std::vector<double> Expr::grad(std::span<const double> point) const {
  const Dual d = eval_dual(point);
  return std::vector<double>(d.d.begin(), d.d.begin() + impl_->m);
}

std::string Expr::print() const {
  std::string out;
  if (impl_) print_node(*impl_->root, out);
  return out;
}

namespace {
void check_same(const Expr& a, const Expr& b) {
  if (a.empty() || b.empty() || a.dimension() != b.dimension()) {
    fail(ErrorKind::SizeMismatch, "combining expressions of different dimension");
  }
}
}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  check_same(a, b);
  return Expr::from_node(make(Op::Add, a.impl_->root, b.impl_->root), a.dimension());
}
Expr operator-(const Expr& a, const Expr& b) {
  check_same(a, b);
  return Expr::from_node(make(Op::Sub, a.impl_->root, b.impl_->root), a.dimension());
}
Expr operator*(const Expr& a, const Expr& b) {
  check_same(a, b);
  return Expr::from_node(make(Op::Mul, a.impl_->root, b.impl_->root), a.dimension());
}
Expr operator/(const Expr& a, const Expr& b) {
  check_same(a, b);
  return Expr::from_node(make(Op::Div, a.impl_->root, b.impl_->root), a.dimension());
}
Expr operator-(const Expr& a) {
  check_same(a, a);
  return Expr::from_node(make(Op::Neg, a.impl_->root), a.dimension());
}

Expr parse(std::string_view text, int m, std::span<const std::string> aliases) {
  if (m <= 0 || m > kMaxVars) fail(ErrorKind::DimensionExceeded, "chart dimension out of range");
  Parser p(text, m, aliases);
  return Expr::from_node(p.parse_all(), m);
}

}  // namespace qclab::expr
