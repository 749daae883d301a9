#include "scorekit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include "scorekit/error.hpp"

namespace scorekit::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

// 21-point Kronrod abscissae (descending, last is the centre) and weights,
// with the embedded 10-point Gauss weights for the odd-indexed abscissae.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208244815290, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  double resabs;
  bool operator<(const Segment& o) const { return error < o.error; }
};

double checked(const RealFn& g, double t) {
  const double v = g(t);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrand evaluated to " << v << " at parameter node " << t;
    fail(ErrorCode::NonFinite, os.str());
  }
  return v;
}

Segment qk21(const RealFn& g, double a, double b) {
  const double centr = 0.5 * (a + b);
  const double hlgth = 0.5 * (b - a);
  const double dhlgth = std::abs(hlgth);

  const double fc = checked(g, centr);
  double resg = 0.0;
  double resk = kWgk[10] * fc;
  double resabs = std::abs(resk);
  std::array<double, 10> fv1{};
  std::array<double, 10> fv2{};

  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double absc = hlgth * kXgk[jtw];
    const double f1 = checked(g, centr - absc);
    const double f2 = checked(g, centr + absc);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double absc = hlgth * kXgk[jtwm1];
    const double f1 = checked(g, centr - absc);
    const double f2 = checked(g, centr + absc);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }

  Segment s{a, b, resk * hlgth, 0.0, resabs * dhlgth};
  resasc *= dhlgth;
  double err = std::abs((resk - resg) * hlgth);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (s.resabs > kTiny / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * s.resabs, err);
  }
  s.error = err;
  return s;
}

struct Mapped {
  RealFn g;
  double lo;
  double hi;
};

Mapped map_to_finite(const RealFn& f, double a, double b) {
  const bool ia = std::isinf(a);
  const bool ib = std::isinf(b);
  if (ia && ib) {
    return {[&f](double t) {
              const double d = 1.0 - t * t;
              const double x = t / d;
              return f(x) * (1.0 + t * t) / (d * d);
            },
            -1.0, 1.0};
  }
  if (ib) {
    return {[&f, a](double t) {
              const double d = 1.0 - t;
              return f(a + t / d) / (d * d);
            },
            0.0, 1.0};
  }
  if (ia) {
    return {[&f, b](double t) {
              const double d = 1.0 - t;
              return f(b - t / d) / (d * d);
            },
            0.0, 1.0};
  }
  return {[&f](double x) { return f(x); }, a, b};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1) {
    fail(ErrorCode::InvalidArgument,
         "quadrature tolerances must be positive and max_subdivisions >= 1");
  }
}

QuadratureResult integrate_detailed(const RealFn& f, double a, double b,
                                    const QuadratureSpec& spec) {
  spec.validate();
  if (std::isnan(a) || std::isnan(b) || !(a < b)) {
    fail(ErrorCode::InvalidArgument, "integration range requires a < b");
  }
  const Mapped m = map_to_finite(f, a, b);

  std::priority_queue<Segment> heap;
  Segment first = qk21(m.g, m.lo, m.hi);
  double total = first.value;
  double total_err = first.error;
  double total_abs = first.resabs;
  heap.push(first);
  std::vector<Segment> frozen;  // too narrow to split further
  int subdivisions = 1;

  auto accepted = [&] {
    const double tol = std::max({spec.abs_tol, spec.rel_tol * std::abs(total),
                                 100.0 * kEps * total_abs});
    return total_err <= tol;
  };

  while (!accepted()) {
    if (heap.empty() || subdivisions >= spec.max_subdivisions) {
      std::ostringstream os;
      os << "quadrature did not converge on (" << a << ", " << b
         << "): estimate " << total << ", error " << total_err << " after "
         << subdivisions << " subdivisions";
      fail(ErrorCode::NonConvergence, os.str());
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const double scale = std::max(std::abs(worst.a), std::abs(worst.b));
    if (std::abs(worst.b - worst.a) <= 1e3 * kEps * std::max(scale, 1e-300) ||
        mid <= worst.a || mid >= worst.b) {
      frozen.push_back(worst);
      continue;
    }
    const Segment left = qk21(m.g, worst.a, mid);
    const Segment right = qk21(m.g, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_abs += left.resabs + right.resabs - worst.resabs;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  // Re-sum from the segments to shed drift from the running updates.
  CompensatedSum value;
  CompensatedSum error;
  while (!heap.empty()) {
    value.add(heap.top().value);
    error.add(heap.top().error);
    heap.pop();
  }
  for (const auto& s : frozen) {
    value.add(s.value);
    error.add(s.error);
  }
  return {value.value(), error.value(), subdivisions};
}

double integrate(const RealFn& f, double a, double b,
                 const QuadratureSpec& spec) {
  return integrate_detailed(f, a, b, spec).value;
}

double integrate(const RealFn& f, double a, double b,
                 std::span<const double> breakpoints,
                 const QuadratureSpec& spec) {
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin() + 1, cuts.end() - 1);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  CompensatedSum sum;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    sum.add(integrate(f, cuts[i], cuts[i + 1], spec));
  }
  return sum.value();
}

Bracket Bracket::around(const RealFn& f, double lo, double hi) {
  return {lo, hi, f(lo), f(hi)};
}

bool Bracket::valid() const {
  if (!(lo < hi)) return false;
  if (std::isnan(f_lo) || std::isnan(f_hi)) return false;
  if (f_lo == 0.0 || f_hi == 0.0) return true;
  return std::signbit(f_lo) != std::signbit(f_hi);
}

RootResult find_root_detailed(const RealFn& f, const Bracket& bracket,
                              double tol, int max_iterations) {
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "root tolerance must be positive");
  if (!bracket.valid()) {
    std::ostringstream os;
    os << "invalid bracket [" << bracket.lo << ", " << bracket.hi
       << "] with values " << bracket.f_lo << ", " << bracket.f_hi;
    fail(ErrorCode::InvalidBracket, os.str());
  }
  if (bracket.f_lo == 0.0) return {bracket.lo, 0.0, 0};
  if (bracket.f_hi == 0.0) return {bracket.hi, 0.0, 0};

  double best_x = bracket.lo;
  double best_f = bracket.f_lo;
  if (std::abs(bracket.f_hi) < std::abs(best_f)) {
    best_x = bracket.hi;
    best_f = bracket.f_hi;
  }
  auto g = [&](double x) {
    const double v = f(x);
    if (std::isnan(v)) fail(ErrorCode::NonFinite, "root function returned NaN");
    if (std::abs(v) < std::abs(best_f)) {
      best_x = x;
      best_f = v;
    }
    return v;
  };
  auto done = [tol](double a, double b) {
    return std::abs(b - a) <= std::max(tol, 4.0 * kEps * std::max(std::abs(a), std::abs(b)));
  };
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iterations);
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi, done, iters);

  if (best_f == 0.0 || std::abs(best_f) <= tol) {
    return {best_x, best_f, static_cast<int>(iters)};
  }
  if (!done(a, b)) {
    fail(ErrorCode::NonConvergence, "root solver exhausted its iteration budget");
  }
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  if (std::abs(fm) <= std::abs(best_f)) return {mid, fm, static_cast<int>(iters)};
  if (best_x >= a && best_x <= b) return {best_x, best_f, static_cast<int>(iters)};
  return {mid, fm, static_cast<int>(iters)};
}

double find_root(const RealFn& f, const Bracket& bracket, double tol) {
  return find_root_detailed(f, bracket, tol).root;
}

double default_step(double x, int order) {
  const double base = order == 1 ? std::cbrt(kEps) : std::sqrt(std::sqrt(kEps));
  return std::max(std::abs(x), 1.0) * base;
}

double central_diff(const RealFn& f, double x, int order, double step) {
  if (order != 1 && order != 2) {
    fail(ErrorCode::InvalidArgument, "central_diff supports order 1 or 2");
  }
  // Make the step exactly representable relative to x.
  volatile double xp = x + step;
  const double h = xp - x;
  const double fp = f(x + h);
  const double fm = f(x - h);
  double out;
  if (order == 1) {
    out = (fp - fm) / (2.0 * h);
  } else {
    const double f0 = f(x);
    out = (fp - 2.0 * f0 + fm) / (h * h);
  }
  if (!std::isfinite(out)) {
    fail(ErrorCode::NonFinite, "finite difference produced a non-finite value");
  }
  return out;
}

double central_diff(const RealFn& f, double x, int order) {
  return central_diff(f, x, order, default_step(x, order));
}

SymEigen3 eig_sym3(const Matrix3& m) {
  double scale = 0.0;
  for (const auto& row : m) {
    for (double v : row) {
      if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "matrix has non-finite entries");
      scale = std::max(scale, std::abs(v));
    }
  }
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (std::abs(m[i][j] - m[j][i]) > 1e-12 * scale) {
        fail(ErrorCode::NotSymmetric, "matrix is not symmetric");
      }
      a(i, j) = 0.5 * (m[i][j] + m[j][i]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(a);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NonConvergence, "symmetric eigen-solver failed");
  }
  SymEigen3 out{};
  for (int j = 0; j < 3; ++j) {
    out.values[j] = solver.eigenvalues()(j);
    for (int i = 0; i < 3; ++i) out.vectors[i][j] = solver.eigenvectors()(i, j);
  }
  return out;
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

void CompensatedSum::merge(const CompensatedSum& other) noexcept {
  add(other.sum_);
  add(other.comp_);
}

}  // namespace scorekit::numerics
