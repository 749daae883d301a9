#pragma once

#include <map>
#include <memory>
#include <string>

namespace scorekit::expr {

/// Forward-mode dual number. Nesting Dual<Dual<double>> yields second
/// derivatives.
template <class T>
struct Dual {
  T v{};
  T d{};
};

struct Node;

/// Compiled arithmetic expression in the single variable `x`.
///
/// Grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | '+' unary | power
///   power   := primary ('^' unary)?          (right associative)
///   primary := number | name | name '(' expr ')' | '(' expr ')'
///
/// Functions: exp, log, abs, sqrt, sin, cos, tanh.
/// Names other than `x` resolve against the constant table supplied at
/// parse time, then `pi` and `e`.
class Expression {
 public:
  static Expression parse(const std::string& text,
                          const std::map<std::string, double>& constants = {});

  double operator()(double x) const;
  /// First derivative in x by forward-mode differentiation.
  double derivative(double x) const;
  double second_derivative(double x) const;

  const std::string& text() const noexcept { return text_; }
  /// True when the expression mentions `x`.
  bool depends_on_x() const noexcept;

 private:
  Expression(std::string text, std::shared_ptr<const Node> root)
      : text_(std::move(text)), root_(std::move(root)) {}

  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace scorekit::expr
