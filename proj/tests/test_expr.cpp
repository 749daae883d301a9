#include <doctest.h>

#include <cmath>
#include <numbers>

#include "scorekit/error.hpp"
#include "scorekit/expr.hpp"
#include "scorekit/numerics.hpp"
#include "support/generators.hpp"

using scorekit::ErrorCode;
using scorekit::expr::Expression;

namespace {

ErrorCode parse_error(const std::string& text) {
  try {
    Expression::parse(text);
  } catch (const scorekit::Error& e) {
    return e.code();
  }
  FAIL("expected a parse error for '" << text << "'");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("evaluation and precedence") {
  CHECK(Expression::parse("1 + 2 * 3")(0.0) == 7.0);
  CHECK(Expression::parse("(1 + 2) * 3")(0.0) == 9.0);
  CHECK(Expression::parse("2^3^2")(0.0) == 512.0);
  CHECK(Expression::parse("-x^2")(3.0) == -9.0);
  CHECK(Expression::parse("x / 2 / 2")(8.0) == 2.0);
  CHECK(Expression::parse("2^-1")(0.0) == 0.5);
  CHECK(Expression::parse("pi")(0.0) == std::numbers::pi);
  CHECK(Expression::parse("e")(0.0) == std::numbers::e);
  CHECK(Expression::parse("1.5e2 + x")(1.0) == 151.0);
  CHECK(Expression::parse("a*x + b", {{"a", 2.0}, {"b", -1.0}})(3.0) == 5.0);
}

TEST_CASE("functions") {
  CHECK(Expression::parse("exp(x)")(1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(Expression::parse("log(x)")(2.0) == doctest::Approx(std::log(2.0)));
  CHECK(Expression::parse("abs(x)")(-4.0) == 4.0);
  CHECK(Expression::parse("sqrt(x)")(9.0) == 3.0);
  CHECK(Expression::parse("sin(x) + cos(x)")(0.3) == doctest::Approx(std::sin(0.3) + std::cos(0.3)));
  CHECK(Expression::parse("tanh(x)")(0.7) == doctest::Approx(std::tanh(0.7)));
}

TEST_CASE("derivatives") {
  const auto e = Expression::parse("x^3 - 2*x");
  CHECK(e.derivative(2.0) == doctest::Approx(10.0));
  CHECK(e.second_derivative(2.0) == doctest::Approx(12.0));
  const auto l = Expression::parse("-log(1 + x^2)");
  CHECK(l.derivative(1.0) == doctest::Approx(-1.0));
  const auto a = Expression::parse("-abs(x)");
  CHECK(a.derivative(2.0) == -1.0);
  CHECK(a.derivative(-2.0) == 1.0);
  CHECK(Expression::parse("x^2.5").derivative(4.0) == doctest::Approx(2.5 * 8.0));
}

TEST_CASE("depends_on_x and text") {
  CHECK(Expression::parse("x + 1").depends_on_x());
  CHECK_FALSE(Expression::parse("pi * 2").depends_on_x());
  CHECK(Expression::parse("x^2").text() == "x^2");
}

TEST_CASE("parse errors") {
  CHECK(parse_error("") == ErrorCode::ParseError);
  CHECK(parse_error("1 +") == ErrorCode::ParseError);
  CHECK(parse_error("(x") == ErrorCode::ParseError);
  CHECK(parse_error("x)") == ErrorCode::ParseError);
  CHECK(parse_error("y + 1") == ErrorCode::ParseError);
  CHECK(parse_error("foo(x)") == ErrorCode::ParseError);
  CHECK(parse_error("2 $ 3") == ErrorCode::ParseError);
}

TEST_CASE("property: polynomial derivatives match coefficients") {
  gen::for_all(100, 21, [](gen::Gen& g, int) {
    const auto c = g.polynomial(g.integer(1, 5), 3.0);
    std::string text = "0";
    for (std::size_t k = 0; k < c.size(); ++k) text += " + (" + std::to_string(c[k]) + ")*x^" + std::to_string(k);
    // std::to_string rounds to 6 decimals, so evaluate against the parsed values.
    std::vector<double> parsed;
    for (double v : c) parsed.push_back(std::stod(std::to_string(v)));
    const auto e = Expression::parse(text);
    const double x = g.uniform(-2.0, 2.0);
    CHECK(e(x) == doctest::Approx(gen::eval_poly(parsed, x)).epsilon(1e-12));
    CHECK(e.derivative(x) == doctest::Approx(gen::eval_poly_prime(parsed, x)).epsilon(1e-10));
  });
}

TEST_CASE("property: forward-mode derivatives agree with finite differences") {
  const std::vector<std::string> bank = {"exp(-x^2/2)*sin(3*x)", "log(1 + exp(x))", "tanh(x)^3",
                                         "sqrt(1 + x^2)", "cos(x)/(2 + sin(x))", "x*exp(-abs(x))"};
  gen::for_all(120, 22, [&](gen::Gen& g, int) {
    const auto e = Expression::parse(g.pick(bank));
    double x = g.uniform(-3.0, 3.0);
    if (std::abs(x) < 1e-3) x = 0.5;
    const auto f = [&](double t) { return e(t); };
    CHECK(e.derivative(x) == doctest::Approx(scorekit::numerics::central_diff(f, x, 1)).epsilon(1e-7));
    CHECK(e.second_derivative(x) ==
          doctest::Approx(scorekit::numerics::central_diff(f, x, 2)).epsilon(1e-5).scale(1.0));
  });
}

}  // TEST_SUITE
