#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "qclab/expr.hpp"

using namespace qclab;
using qclab::expr::parse;

namespace {

ErrorKind kind_of(const std::string& text, int m) {
  try {
    const auto e = parse(text, m);
    const std::vector<double> u(static_cast<std::size_t>(m), -0.5);
    e.eval(u);
  } catch (const Error& err) {
    return err.kind();
  }
  FAIL("expected an error for " << text);
  return ErrorKind::IoError;
}

}  // namespace

TEST_SUITE("expr") {
TEST_CASE("precedence and associativity") {
  const std::vector<double> u{3.0, 2.0};
  CHECK(parse("2 + 3*4^2", 2).eval(u) == doctest::Approx(50.0));
  CHECK(parse("2^3^2", 2).eval(u) == doctest::Approx(512.0));
  CHECK(parse("8 / 4 / 2", 2).eval(u) == doctest::Approx(1.0));
  CHECK(parse("-u1^2", 2).eval(u) == doctest::Approx(-9.0));
  CHECK(parse("u1 - u2 - 1", 2).eval(u) == doctest::Approx(0.0));
  CHECK(parse("1.5e1 * (u2 + 1)", 2).eval(u) == doctest::Approx(45.0));
}

TEST_CASE("functions and aliases") {
  const std::vector<std::string> names{"x", "t"};
  const std::vector<double> u{0.3, 0.4};
  const auto e = parse("sin(x)*cos(t) + exp(x) - log(1 + t) + sqrt(t) + tanh(x)", 2, names);
  const double ref = std::sin(0.3) * std::cos(0.4) + std::exp(0.3) - std::log(1.4) + std::sqrt(0.4) + std::tanh(0.3);
  CHECK(e.eval(u) == doctest::Approx(ref).epsilon(1e-15));
}

TEST_CASE("dual-number gradients match finite differences") {
  const std::vector<std::string> texts = {"exp(0.2*u1 + 0.3*u2) * u3", "1/((1 + u1^2 + u2^2)^2 + u3^2)",
                                          "sin(u1*u2) - tanh(u3)^3", "sqrt(2 + u1) / (3 + cos(u2 + u3))"};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(-0.8, 0.8);
  for (const auto& t : texts) {
    const auto e = parse(t, 3);
    std::vector<double> u{ud(rng), ud(rng), ud(rng)};
    const auto g = e.grad(u);
    for (int r = 0; r < 3; ++r) {
      const double h = 1e-5;
      auto up = u, um = u;
      up[r] += h;
      um[r] -= h;
      CHECK(g[r] == doctest::Approx((e.eval(up) - e.eval(um)) / (2 * h)).epsilon(1e-7));
    }
  }
}

TEST_CASE("print then parse reproduces the expression") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(-0.9, 0.9);
  for (const char* t : {"-u1 + 2*u2^3 - u3/7", "exp(-u1)*(u2 - 0.1)", "1/((1 + u1^2)^2 + u3^2)"}) {
    const auto e = parse(t, 3);
    const auto back = parse(e.print(), 3);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> u{ud(rng), ud(rng), ud(rng)};
      CHECK(back.eval(u) == e.eval(u));
    }
  }
}

TEST_CASE("arithmetic on expressions") {
  const auto a = parse("u1", 2);
  const auto b = parse("u2", 2);
  const std::vector<double> u{2.0, 5.0};
  CHECK(((a + b) * (a - b) / b).eval(u) == doctest::Approx(-21.0 / 5.0));
  CHECK((-a).eval(u) == doctest::Approx(-2.0));
  CHECK(expr::Expr::constant(3.0, 2).is_constant());
}

TEST_CASE("errors carry their kind and location") {
  CHECK(kind_of("1 + * 2", 3) == ErrorKind::SyntaxError);
  CHECK(kind_of("(u1 + 1", 3) == ErrorKind::SyntaxError);
  CHECK(kind_of("foo(u1)", 3) == ErrorKind::UnknownIdentifier);
  CHECK(kind_of("y + 1", 3) == ErrorKind::UnknownIdentifier);
  CHECK(kind_of("u4", 3) == ErrorKind::DimensionExceeded);
  CHECK(kind_of("log(u1)", 3) == ErrorKind::EvalDomainError);
  CHECK(kind_of("1/(u1 + 0.5)", 3) == ErrorKind::EvalDomainError);
  try {
    parse("u1 + $", 3);
    FAIL("no error");
  } catch (const LocatedError& e) {
    CHECK(e.location() == 5);
  }
  CHECK_THROWS_AS(parse("u1", 20), Error);
  CHECK_THROWS_AS(parse("u1 + u2", 2).eval(std::vector<double>{1.0}), Error);
}
}
