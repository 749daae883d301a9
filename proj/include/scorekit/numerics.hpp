#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>

namespace scorekit::numerics {

using RealFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 2000;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

/// Adaptive 21-point Gauss-Kronrod quadrature of f over (a, b).
///
/// Either endpoint may be infinite. Infinite ranges are mapped onto a finite
/// parameter interval before subdivision:
///   (-inf, inf): x = t / (1 - t^2),  t in (-1, 1)
///   (a, inf):    x = a + t / (1 - t), t in (0, 1)
///   (-inf, b):   x = b - t / (1 - t), t in (0, 1)
/// Kronrod nodes are interior, so f is never evaluated at an endpoint.
///
/// Accepts when the summed error estimate is below
/// max(abs_tol, rel_tol * |result|), or below the rounding floor
/// 100 * eps * integral of |f| when that is larger.
///
/// Throws NonConvergence when the subdivision budget is exhausted, and
/// NonFinite when f returns NaN or an infinity at a node.
QuadratureResult integrate_detailed(const RealFn& f, double a, double b,
                                    const QuadratureSpec& spec = {});

double integrate(const RealFn& f, double a, double b,
                 const QuadratureSpec& spec = {});

/// Same as integrate, with the range split at the given interior points
/// (kinks or singular points of the integrand). Points outside (a, b) are
/// ignored. Each piece gets the full tolerance budget.
double integrate(const RealFn& f, double a, double b,
                 std::span<const double> breakpoints,
                 const QuadratureSpec& spec = {});

struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;

  /// Evaluates f at both ends.
  static Bracket around(const RealFn& f, double lo, double hi);
  bool valid() const;
};

struct RootResult {
  double root;
  double residual;
  int iterations;
};

/// Bracketing root solve (TOMS 748, falls back to bisection steps
/// internally). Returns once |f(x)| <= tol or the bracket is narrower
/// than tol. The root always lies inside the initial bracket.
RootResult find_root_detailed(const RealFn& f, const Bracket& bracket,
                              double tol, int max_iterations = 500);

double find_root(const RealFn& f, const Bracket& bracket, double tol);

/// Central difference with step max(|x|, 1) * eps^(1/3) (order 1) or
/// eps^(1/4) (order 2).
double central_diff(const RealFn& f, double x, int order);

/// As above with an explicit step.
double central_diff(const RealFn& f, double x, int order, double step);

double default_step(double x, int order);

using Matrix3 = std::array<std::array<double, 3>, 3>;

struct SymEigen3 {
  std::array<double, 3> values;  // ascending
  Matrix3 vectors;               // column j pairs with values[j]
};

/// Eigen-decomposition of a symmetric 3x3 matrix. Rejects matrices whose
/// asymmetry exceeds 1e-12 relative to the largest entry.
SymEigen3 eig_sym3(const Matrix3& m);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  void merge(const CompensatedSum& other) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace scorekit::numerics
