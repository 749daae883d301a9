#include "scorekit/stein.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scorekit/error.hpp"
#include "scorekit/expr.hpp"
#include "scorekit/parallel.hpp"

namespace scorekit::stein {

namespace {

void require_positive_support(const Density& d, OperatorKind kind) {
  if (kind == OperatorKind::Location) return;
  const auto& s = d.support();
  if (s.lo != 0.0 || !std::isinf(s.hi)) {
    fail(ErrorCode::InvalidOperator,
         to_string(kind) + " operator needs a target supported on (0, inf); " + d.name() +
             " is not");
  }
}

// Operator value given a precomputed score (unused for the exponential kinds).
double operator_value(OperatorKind kind, double fx, double fpx, double phi, double x) {
  switch (kind) {
    case OperatorKind::Location: return fpx + phi * fx;
    case OperatorKind::ExpUnit: return fpx - fx;
    case OperatorKind::ExpScale: return x * fpx - (x - 1.0) * fx;
  }
  return std::nan("");
}

bool usable_point(const Density& d, OperatorKind kind, double x) {
  if (!d.support().interior(x)) return false;
  return kind != OperatorKind::Location || !d.is_nondiff_point(x);
}

DiscrepancyReport discrepancy(std::span<const double> sample, const Density& d, OperatorKind kind,
                              const std::vector<TestFunction>& tfs, bool serial) {
  if (sample.empty()) fail(ErrorCode::EmptySample, "Stein discrepancy needs a nonempty sample");
  require_positive_support(d, kind);
  const auto row = [&](std::size_t i, std::span<double> out) {
    const double x = sample[i];
    if (!usable_point(d, kind, x)) return false;
    const double phi = kind == OperatorKind::Location ? d.score(x) : 0.0;
    for (std::size_t j = 0; j < tfs.size(); ++j) {
      out[j] = operator_value(kind, tfs[j].f(x), tfs[j].f_prime(x), phi, x);
      if (!std::isfinite(out[j])) {
        std::ostringstream os;
        os << "operator on '" << tfs[j].label << "' is not finite at sample point " << x;
        fail(ErrorCode::NonFinite, os.str());
      }
    }
    return true;
  };
  const auto sums = serial ? parallel::column_sums_serial(sample.size(), tfs.size(), row)
                           : parallel::column_sums(sample.size(), tfs.size(), row);
  if (sums.included == 0) {
    fail(ErrorCode::EmptySample, "no sample point lies inside the support of " + d.name());
  }
  DiscrepancyReport r;
  r.target = d.name();
  r.kind = kind;
  r.n = sample.size();
  r.excluded = sample.size() - sums.included;
  for (std::size_t j = 0; j < tfs.size(); ++j) {
    const double mean = sums.sums[j] / static_cast<double>(sums.included);
    r.per_function.push_back({tfs[j].label, mean});
    r.max_abs = std::max(r.max_abs, std::abs(mean));
  }
  return r;
}

// |x|-weighted for the scale operator: x f' - (x - 1) f = (x f p)' / p when p = e^{-x}.
double boundary_weight(const Density& d, const TestFunction& tf, OperatorKind kind, double x) {
  const double p = d.pdf(x);
  if (p == 0.0) return 0.0;
  const double fx = tf.f(x);
  if (std::isnan(fx)) {
    std::ostringstream os;
    os << "test function '" << tf.label << "' is NaN at " << x;
    fail(ErrorCode::NonFinite, os.str());
  }
  const double w = std::abs(fx) * p;
  return kind == OperatorKind::ExpScale ? std::abs(x) * w : w;
}

}  // namespace

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Location: return "location";
    case OperatorKind::ExpUnit: return "exp_unit";
    case OperatorKind::ExpScale: return "exp_scale";
  }
  return "unknown";
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "location") return OperatorKind::Location;
  if (s == "exp_unit") return OperatorKind::ExpUnit;
  if (s == "exp_scale") return OperatorKind::ExpScale;
  fail(ErrorCode::InvalidArgument, "unknown Stein operator kind '" + s + "'");
}

TestFunction monomial(int degree) {
  if (degree < 0) fail(ErrorCode::InvalidArgument, "monomial degree must be >= 0");
  const double k = degree;
  std::string label = degree == 0 ? "1" : degree == 1 ? "x" : "x^" + std::to_string(degree);
  return {[k](double x) { return std::pow(x, k); },
          [k](double x) { return k == 0.0 ? 0.0 : k * std::pow(x, k - 1.0); }, label};
}

TestFunction sine() {
  return {[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, "sin"};
}

TestFunction hyperbolic_tangent() {
  return {[](double x) { return std::tanh(x); },
          [](double x) {
            const double t = std::tanh(x);
            return 1.0 - t * t;
          },
          "tanh"};
}

TestFunction gaussian_bump() {
  return {[](double x) { return std::exp(-0.5 * x * x); },
          [](double x) { return -x * std::exp(-0.5 * x * x); }, "exp(-x^2/2)"};
}

TestFunction constant_one() { return monomial(0); }

TestFunction from_expression(const std::string& text) {
  const auto e = expr::Expression::parse(text);
  return {[e](double x) { return e(x); }, [e](double x) { return e.derivative(x); }, text};
}

TestFunction linear_combination(double a, const TestFunction& f, double b, const TestFunction& g) {
  std::ostringstream label;
  label << a << "*" << f.label << "+" << b << "*" << g.label;
  return {[=](double x) { return a * f.f(x) + b * g.f(x); },
          [=](double x) { return a * f.f_prime(x) + b * g.f_prime(x); }, label.str()};
}

std::vector<TestFunction> default_bank() {
  return {monomial(1), monomial(2), monomial(3), sine(), hyperbolic_tangent(), gaussian_bump()};
}

double apply_operator(const Density& d, OperatorKind kind, const TestFunction& tf, double x) {
  require_positive_support(d, kind);
  double phi = 0.0;
  if (kind == OperatorKind::Location) {
    phi = location_score(d, x).phi;
  } else if (!d.support().interior(x)) {
    std::ostringstream os;
    os << "x = " << x << " is outside the open support of " << d.name();
    fail(ErrorCode::OutOfSupport, os.str());
  }
  return operator_value(kind, tf.f(x), tf.f_prime(x), phi, x);
}

bool boundary_condition_check(const Density& d, const TestFunction& tf, OperatorKind kind) {
  constexpr int kSteps = 240;  // probes at ratio 2^(1/4), out to 2^60
  constexpr int kTail = 3;     // outermost probes with p > 0 that must all be small
  constexpr double kLimit = 1e-8;
  const auto& s = d.support();
  const double width = std::isfinite(s.lo) && std::isfinite(s.hi) ? 0.5 * (s.hi - s.lo) : 1.0;
  const double anchor = std::isfinite(s.lo) && std::isfinite(s.hi) ? 0.5 * (s.lo + s.hi)
                        : std::isfinite(s.lo)                       ? s.lo
                        : std::isfinite(s.hi)                       ? s.hi
                                                                    : 0.0;

  const auto end_vanishes = [&](double end, double inward) {
    std::vector<double> weights;
    for (int k = 0; k <= kSteps; ++k) {
      const double step = std::exp2(0.25 * k);
      const double x = std::isfinite(end) ? end + inward * width / step : anchor - inward * step;
      if (!s.interior(x) || !(d.pdf(x) > 0.0)) continue;
      weights.push_back(boundary_weight(d, tf, kind, x));
    }
    const auto first = weights.size() > kTail ? weights.end() - kTail : weights.begin();
    return std::all_of(first, weights.end(), [&](double w) { return w <= kLimit; });
  };
  return end_vanishes(s.lo, 1.0) && end_vanishes(s.hi, -1.0);
}

double expected_operator(const Density& d, OperatorKind kind, const TestFunction& tf,
                         const numerics::QuadratureSpec& spec) {
  require_positive_support(d, kind);
  return expect(
      d,
      [&](double x) {
        const double phi = kind == OperatorKind::Location ? d.score(x) : 0.0;
        return operator_value(kind, tf.f(x), tf.f_prime(x), phi, x);
      },
      spec);
}

std::vector<TestFunction> admissible(const Density& d, OperatorKind kind,
                                     const std::vector<TestFunction>& bank) {
  std::vector<TestFunction> out;
  for (const auto& tf : bank) {
    if (boundary_condition_check(d, tf, kind)) out.push_back(tf);
  }
  return out;
}

DiscrepancyReport empirical_discrepancy(std::span<const double> sample, const Density& d,
                                        OperatorKind kind, const std::vector<TestFunction>& tfs) {
  return discrepancy(sample, d, kind, tfs, false);
}

DiscrepancyReport empirical_discrepancy_serial(std::span<const double> sample, const Density& d,
                                               OperatorKind kind,
                                               const std::vector<TestFunction>& tfs) {
  return discrepancy(sample, d, kind, tfs, true);
}

}  // namespace scorekit::stein
