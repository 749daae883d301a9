#pragma once

#include <span>
#include <string>
#include <vector>

#include "scorekit/density.hpp"

namespace scorekit::stein {

struct TestFunction {
  RealFn f;
  RealFn f_prime;
  std::string label;
};

/// location:  f'(x) + phi_p(x) f(x)
/// exp_unit:  f'(x) - f(x)
/// exp_scale: x f'(x) - (x - 1) f(x)
/// The two exponential operators require a target supported on (0, inf).
enum class OperatorKind { Location, ExpUnit, ExpScale };

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& s);

struct LabeledValue {
  std::string label;
  double value;
};

struct DiscrepancyReport {
  std::string target;
  OperatorKind kind = OperatorKind::Location;
  std::size_t n = 0;         // sample size as given
  std::size_t excluded = 0;  // points outside the open support or at a nondiff point
  std::vector<LabeledValue> per_function;
  double max_abs = 0.0;
};

TestFunction monomial(int degree);
TestFunction sine();
TestFunction hyperbolic_tangent();
TestFunction gaussian_bump();
TestFunction constant_one();
/// f from an expression in x; f' by forward-mode differentiation.
TestFunction from_expression(const std::string& text);
/// a * f + b * g
TestFunction linear_combination(double a, const TestFunction& f, double b, const TestFunction& g);

/// {x, x^2, x^3, sin x, tanh x, exp(-x^2/2)}
std::vector<TestFunction> default_bank();

double apply_operator(const Density& d, OperatorKind kind, const TestFunction& tf, double x);

/// Checks that the boundary term of the integration by parts vanishes,
/// i.e. |f p| (|x f p| for exp_scale) tends to at most 1e-8 at both support
/// ends, probed along geometric sequences.
bool boundary_condition_check(const Density& d, const TestFunction& tf,
                              OperatorKind kind = OperatorKind::Location);

double expected_operator(const Density& d, OperatorKind kind, const TestFunction& tf,
                         const numerics::QuadratureSpec& spec = {});

/// Bank entries that pass the boundary check for this target and kind.
std::vector<TestFunction> admissible(const Density& d, OperatorKind kind,
                                     const std::vector<TestFunction>& bank);

/// Sample means of the operator per test function. Uses the OpenMP kernel,
/// whose result does not depend on the thread count.
DiscrepancyReport empirical_discrepancy(std::span<const double> sample, const Density& d,
                                        OperatorKind kind, const std::vector<TestFunction>& tfs);

/// Single-threaded reference used to validate the parallel kernel.
DiscrepancyReport empirical_discrepancy_serial(std::span<const double> sample, const Density& d,
                                               OperatorKind kind,
                                               const std::vector<TestFunction>& tfs);

}  // namespace scorekit::stein
