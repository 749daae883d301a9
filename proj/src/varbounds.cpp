#include "scorekit/varbounds.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "scorekit/error.hpp"
#include "scorekit/expr.hpp"

namespace scorekit::varbounds {

namespace {

// Bounds are compared against each other at the 1e-8 level, so the
// expectations here run tighter than the library default.
const numerics::QuadratureSpec kOuter{1e-12, 1e-11, 4000};
const numerics::QuadratureSpec kInner{1e-13, 1e-11, 4000};

// Tail first moments T+(t) = int_t^b x p and T-(t) = int_a^t x p, memoized
// per evaluation point.
class TailMoments {
 public:
  explicit TailMoments(const Density& d) : d_(d) {}

  double upper(double t) { return cached(upper_, t, true); }
  double lower(double t) { return cached(lower_, t, false); }

 private:
  double cached(std::unordered_map<double, double>& cache, double t, bool up) {
    if (const auto it = cache.find(t); it != cache.end()) return it->second;
    const auto& s = d_.support();
    const auto xp = [this](double x) {
      const double p = d_.pdf(x);
      return p == 0.0 ? 0.0 : x * p;
    };
    double v = 0.0;
    if (up) {
      const double from = std::max(t, s.lo);
      if (from < s.hi) v = numerics::integrate(xp, from, s.hi, d_.nondiff_points(), kInner);
    } else {
      const double to = std::min(t, s.hi);
      if (s.lo < to) v = numerics::integrate(xp, s.lo, to, d_.nondiff_points(), kInner);
    }
    cache.emplace(t, v);
    return v;
  }

  Density d_;
  std::unordered_map<double, double> upper_;
  std::unordered_map<double, double> lower_;
};

void require_finite_first_moment(const Density& d) {
  double m = 0.0;
  try {
    m = expect(d, [](double x) { return std::abs(x); }, kOuter);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonConvergence || e.code() == ErrorCode::NonFinite) {
      fail(ErrorCode::HeavyTail, d.name() + " has no finite first absolute moment");
    }
    throw;
  }
  if (!std::isfinite(m)) fail(ErrorCode::HeavyTail, d.name() + " has no finite first absolute moment");
}

BoundEntry attempt(const std::string& name, const std::function<double()>& compute) {
  BoundEntry b;
  b.name = name;
  try {
    b.value = compute();
  } catch (const Error& e) {
    b.reason = std::string(to_string(e.code())) + ": " + e.what();
  }
  return b;
}

}  // namespace

const BoundEntry& VarianceBoundReport::bound(const std::string& name) const {
  for (const auto& b : bounds) {
    if (b.name == name) return b;
  }
  fail(ErrorCode::InvalidArgument, "report has no bound named '" + name + "'");
}

SmoothFunction from_expression(const std::string& text) {
  const auto e = expr::Expression::parse(text);
  return {[e](double x) { return e(x); }, [e](double x) { return e.derivative(x); }, text};
}

SmoothFunction polynomial_term(int degree) {
  const double k = degree;
  const std::string label = degree == 1 ? "x" : "x^" + std::to_string(degree);
  return {[k](double x) { return std::pow(x, k); },
          [k](double x) { return k == 0.0 ? 0.0 : k * std::pow(x, k - 1.0); }, label};
}

double variance_of(const Density& d, const SmoothFunction& g) {
  const double mean = expect(d, g.g, kOuter);
  return expect(
      d,
      [&](double x) {
        const double c = g.g(x) - mean;
        return c * c;
      },
      kOuter);
}

double chernoff_bound(const SmoothFunction& g) {
  const auto f = [&](double x) {
    const double p = std_normal_pdf(x);
    if (p == 0.0) return 0.0;
    const double gp = g.g_prime(x);
    return gp * gp * p;
  };
  return numerics::integrate(f, -numerics::kInf, numerics::kInf, kOuter);
}

double cacoullos_bound(const Density& d, const SmoothFunction& g) {
  require_finite_first_moment(d);
  TailMoments tails(d);
  const auto& s = d.support();
  std::vector<double> cuts = d.nondiff_points();
  cuts.push_back(s.lo);
  cuts.push_back(s.hi);

  double positive = 0.0;
  if (s.hi > 0.0) {
    const auto f = [&](double t) {
      const double tail = tails.upper(t);
      if (tail == 0.0) return 0.0;
      const double gp = g.g_prime(t);
      return gp * gp * tail;
    };
    positive = numerics::integrate(f, 0.0, s.hi, cuts, kOuter);
  }
  double negative = 0.0;
  if (s.lo < 0.0) {
    const auto f = [&](double t) {
      const double tail = tails.lower(t);
      if (tail == 0.0) return 0.0;
      const double gp = g.g_prime(t);
      return gp * gp * tail;
    };
    negative = numerics::integrate(f, s.lo, 0.0, cuts, kOuter);
  }
  return positive - negative;
}

CacoullosChain cacoullos_chain(const Density& d, const SmoothFunction& g) {
  require_finite_first_moment(d);
  const double g0 = g.g(0.0);
  const double second = expect(
      d,
      [&](double x) {
        const double c = g.g(x) - g0;
        return c * c;
      },
      kOuter);
  const auto gp2 = [&](double t) {
    const double v = g.g_prime(t);
    return v * v;
  };
  const double cs = expect(
      d,
      [&](double x) {
        if (x == 0.0) return 0.0;
        const double inner = x > 0.0 ? numerics::integrate(gp2, 0.0, x, kInner)
                                     : -numerics::integrate(gp2, x, 0.0, kInner);
        return x * inner;
      },
      kOuter);
  return {variance_of(d, g), second, cs};
}

double sharp_bound(const Density& d, const SmoothFunction& g) {
  if (!is_log_concave(d, true)) {
    fail(ErrorCode::NotStrictlyLogConcave,
         d.name() + " is not strictly log-concave on its central 99.9% region");
  }
  return expect(
      d,
      [&](double x) {
        const double curvature = -d.score_prime(x);
        const double gp = g.g_prime(x);
        if (gp == 0.0) return 0.0;
        return curvature > 0.0 ? gp * gp / curvature : numerics::kInf;
      },
      kOuter);
}

bool is_standard_normal(const Density& d) {
  if (d.name() != "normal") return false;
  const auto& p = d.params();
  const auto mu = p.find("mu");
  const auto sigma = p.find("sigma");
  return mu != p.end() && sigma != p.end() && mu->second == 0.0 && sigma->second == 1.0;
}

VarianceBoundReport bound_report(const Density& d, const SmoothFunction& g) {
  VarianceBoundReport r;
  r.density = d.name();
  r.g = g.label;
  r.variance = variance_of(d, g);
  try {
    r.mean_x = expect(d, [](double x) { return x; }, kOuter);
  } catch (const Error&) {
    r.mean_x = std::nan("");
  }

  BoundEntry chernoff;
  chernoff.name = "chernoff";
  if (is_standard_normal(d)) {
    chernoff = attempt("chernoff", [&] { return chernoff_bound(g); });
  } else {
    chernoff.reason = "applies to the standard normal target only";
  }
  r.bounds.push_back(chernoff);
  r.bounds.push_back(attempt("cacoullos", [&] { return cacoullos_bound(d, g); }));
  r.bounds.push_back(attempt("sharp", [&] { return sharp_bound(d, g); }));
  for (auto& b : r.bounds) {
    if (b.value && *b.value > 0.0) b.ratio = r.variance / *b.value;
  }
  return r;
}

}  // namespace scorekit::varbounds
