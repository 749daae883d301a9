#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scorekit/density.hpp"

namespace scorekit::varbounds {

struct SmoothFunction {
  RealFn g;
  RealFn g_prime;
  std::string label;
};

SmoothFunction from_expression(const std::string& text);
SmoothFunction polynomial_term(int degree);  // x^degree

/// A bound that was either computed or skipped with a reason.
struct BoundEntry {
  std::string name;
  std::optional<double> value;
  std::string reason;             // set when value is empty
  std::optional<double> ratio;    // variance / value, when value > 0
};

struct VarianceBoundReport {
  std::string density;
  std::string g;
  double mean_x = 0.0;  // E[X]; Cacoullos equality needs it to vanish
  double variance = 0.0;
  std::vector<BoundEntry> bounds;  // chernoff, cacoullos, sharp (in that order)

  const BoundEntry& bound(const std::string& name) const;
};

double variance_of(const Density& d, const SmoothFunction& g);

/// E[g'(X)^2] for X standard normal.
double chernoff_bound(const SmoothFunction& g);

/// Nested-quadrature form of the double-integral bound:
///   int_0^inf g'(t)^2 T+(t) dt - int_{-inf}^0 g'(t)^2 T-(t) dt,
/// with T+(t) = int_t^inf x p(x) dx and T-(t) = int_{-inf}^t x p(x) dx.
/// Throws HeavyTail when E|X| is not finite.
double cacoullos_bound(const Density& d, const SmoothFunction& g);

/// Intermediate quantities of the Cauchy-Schwarz chain behind the
/// Cacoullos bound, for debugging:
///   variance <= E[(g(X) - g(0))^2] <= E[X int_0^X g'(t)^2 dt].
struct CacoullosChain {
  double variance;
  double second_moment_about_g0;
  double cauchy_schwarz;
};
CacoullosChain cacoullos_chain(const Density& d, const SmoothFunction& g);

/// E[g'(X)^2 / (-phi_p)'(X)]. Requires strict log-concavity of d on the
/// central 99.9% grid, otherwise throws NotStrictlyLogConcave.
double sharp_bound(const Density& d, const SmoothFunction& g);

/// True when d is the standard normal, the only target the Chernoff bound
/// applies to.
bool is_standard_normal(const Density& d);

VarianceBoundReport bound_report(const Density& d, const SmoothFunction& g);

}  // namespace scorekit::varbounds
