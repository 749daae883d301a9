#include "scorekit/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "scorekit/error.hpp"
#include "scorekit/expr.hpp"

namespace scorekit {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

class ParamReader {
 public:
  ParamReader(std::string family, const Params& given) : family_(std::move(family)), given_(given) {}

  double get(const std::string& key, double fallback) {
    used_.push_back(key);
    const auto it = given_.find(key);
    const double v = it == given_.end() ? fallback : it->second;
    if (!std::isfinite(v)) bad(key, v, "must be finite");
    return v;
  }

  double positive(const std::string& key, double fallback) {
    const double v = get(key, fallback);
    if (!(v > 0.0)) bad(key, v, "must be positive");
    return v;
  }

  // Rejects keys the family does not know.
  Params finish() const {
    Params out;
    for (const auto& [k, v] : given_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
        fail(ErrorCode::InvalidParameter, "family '" + family_ + "' has no parameter '" + k + "'");
      }
    }
    for (const auto& k : used_) out[k] = values_.at(k);
    return out;
  }

  void record(const std::string& key, double v) { values_[key] = v; }

 private:
  [[noreturn]] void bad(const std::string& key, double v, const char* why) const {
    std::ostringstream os;
    os << family_ << " parameter " << key << " = " << v << " " << why;
    fail(ErrorCode::InvalidParameter, os.str());
  }

  std::string family_;
  const Params& given_;
  std::vector<std::string> used_;
  Params values_;
};

double rd(ParamReader& r, const std::string& key, double fallback, bool positive) {
  const double v = positive ? r.positive(key, fallback) : r.get(key, fallback);
  r.record(key, v);
  return v;
}

Density normal(ParamReader& r) {
  const double mu = rd(r, "mu", 0.0, false);
  const double sigma = rd(r, "sigma", 1.0, true);
  const double log_sigma = std::log(sigma);
  DensityDef d;
  d.name = "normal";
  d.log_pdf = [=](double x) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - log_sigma - kLogSqrt2Pi;
  };
  d.score = [=](double x) { return -(x - mu) / (sigma * sigma); };
  d.score_prime = [=](double) { return -1.0 / (sigma * sigma); };
  d.cdf = [=](double x) { return std_normal_cdf((x - mu) / sigma); };
  d.quantile = [=](double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(mu, sigma), p);
  };
  d.sampler = [=](Rng& rng) {
    const double u1 = uniform_open(rng);
    const double u2 = uniform_open(rng);
    return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  d.symmetric = mu == 0.0;
  d.params = r.finish();
  return Density(std::move(d));
}

Density exponential(ParamReader& r) {
  const double lambda = rd(r, "lambda", 1.0, true);
  const double log_lambda = std::log(lambda);
  DensityDef d;
  d.name = "exponential";
  d.support = {0.0, numerics::kInf};
  d.log_pdf = [=](double x) { return log_lambda - lambda * x; };
  d.score = [=](double) { return -lambda; };
  d.score_prime = [](double) { return 0.0; };
  d.cdf = [=](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-lambda * x); };
  d.quantile = [=](double p) { return -std::log1p(-p) / lambda; };
  d.sampler = [=](Rng& rng) { return -std::log(uniform_open(rng)) / lambda; };
  d.params = r.finish();
  return Density(std::move(d));
}

Density laplace(ParamReader& r) {
  const double mu = rd(r, "mu", 0.0, false);
  const double b = rd(r, "b", 1.0, true);
  const double log_2b = std::log(2.0 * b);
  DensityDef d;
  d.name = "laplace";
  d.log_pdf = [=](double x) { return -std::abs(x - mu) / b - log_2b; };
  d.score = [=](double x) { return -sign(x - mu) / b; };
  d.score_prime = [](double) { return 0.0; };
  d.cdf = [=](double x) {
    const double z = (x - mu) / b;
    return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
  };
  const auto quantile = [=](double p) {
    return p < 0.5 ? mu + b * std::log(2.0 * p) : mu - b * std::log(2.0 * (1.0 - p));
  };
  d.quantile = quantile;
  d.sampler = [=](Rng& rng) { return quantile(uniform_open(rng)); };
  d.symmetric = mu == 0.0;
  d.nondiff_points = {mu};
  d.piecewise_constant_score = true;
  d.params = r.finish();
  return Density(std::move(d));
}

Density gumbel(ParamReader& r) {
  const double mu = rd(r, "mu", 0.0, false);
  const double beta = rd(r, "beta", 1.0, true);
  const double log_beta = std::log(beta);
  DensityDef d;
  d.name = "gumbel";
  d.log_pdf = [=](double x) {
    const double z = (x - mu) / beta;
    return -z - std::exp(-z) - log_beta;
  };
  d.score = [=](double x) { return std::expm1(-(x - mu) / beta) / beta; };
  d.score_prime = [=](double x) { return -std::exp(-(x - mu) / beta) / (beta * beta); };
  d.cdf = [=](double x) { return std::exp(-std::exp(-(x - mu) / beta)); };
  const auto quantile = [=](double p) { return mu - beta * std::log(-std::log(p)); };
  d.quantile = quantile;
  d.sampler = [=](Rng& rng) { return quantile(uniform_open(rng)); };
  d.params = r.finish();
  return Density(std::move(d));
}

Density student(ParamReader& r) {
  const double nu = rd(r, "nu", 5.0, true);
  const double mu = rd(r, "mu", 0.0, false);
  const double sigma = rd(r, "sigma", 1.0, true);
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                          0.5 * std::log(nu * std::numbers::pi) - std::log(sigma);
  const boost::math::students_t_distribution<double> dist(nu);
  DensityDef d;
  d.name = "student";
  d.log_pdf = [=](double x) {
    const double z = (x - mu) / sigma;
    return log_norm - 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
  };
  d.score = [=](double x) {
    const double z = (x - mu) / sigma;
    return -(nu + 1.0) * z / (sigma * (nu + z * z));
  };
  d.score_prime = [=](double x) {
    const double z = (x - mu) / sigma;
    const double den = nu + z * z;
    return -(nu + 1.0) * (nu - z * z) / (sigma * sigma * den * den);
  };
  d.cdf = [=](double x) { return boost::math::cdf(dist, (x - mu) / sigma); };
  const auto quantile = [=](double p) { return mu + sigma * boost::math::quantile(dist, p); };
  d.quantile = quantile;
  d.sampler = [=](Rng& rng) { return quantile(uniform_open(rng)); };
  d.symmetric = mu == 0.0;
  d.params = r.finish();
  return Density(std::move(d));
}

Density gamma(ParamReader& r) {
  const double k = rd(r, "k", 3.0, true);
  const double theta = rd(r, "scale", 1.0, true);
  const double log_norm = -std::lgamma(k) - k * std::log(theta);
  const boost::math::gamma_distribution<double> dist(k, theta);
  DensityDef d;
  d.name = "gamma";
  d.support = {0.0, numerics::kInf};
  d.log_pdf = [=](double x) { return (k - 1.0) * std::log(x) - x / theta + log_norm; };
  d.score = [=](double x) { return (k - 1.0) / x - 1.0 / theta; };
  d.score_prime = [=](double x) { return -(k - 1.0) / (x * x); };
  d.cdf = [=](double x) { return x <= 0.0 ? 0.0 : boost::math::cdf(dist, x); };
  const auto quantile = [=](double p) { return boost::math::quantile(dist, p); };
  d.quantile = quantile;
  d.sampler = [=](Rng& rng) { return quantile(uniform_open(rng)); };
  d.params = r.finish();
  return Density(std::move(d));
}

Density logistic(ParamReader& r) {
  const double mu = rd(r, "mu", 0.0, false);
  const double s = rd(r, "s", 1.0, true);
  const double log_s = std::log(s);
  DensityDef d;
  d.name = "logistic";
  d.log_pdf = [=](double x) {
    const double a = std::abs((x - mu) / s);
    return -a - 2.0 * std::log1p(std::exp(-a)) - log_s;
  };
  d.score = [=](double x) { return -std::tanh(0.5 * (x - mu) / s) / s; };
  d.score_prime = [=](double x) {
    const double t = std::tanh(0.5 * (x - mu) / s);
    return -(1.0 - t * t) / (2.0 * s * s);
  };
  d.cdf = [=](double x) { return 1.0 / (1.0 + std::exp(-(x - mu) / s)); };
  const auto quantile = [=](double p) { return mu + s * std::log(p / (1.0 - p)); };
  d.quantile = quantile;
  d.sampler = [=](Rng& rng) { return quantile(uniform_open(rng)); };
  d.symmetric = mu == 0.0;
  d.params = r.finish();
  return Density(std::move(d));
}

// Keeps x +- h inside the open support and off the non-differentiable points.
double safe_step(const Density& d, double x, int order) {
  double h = numerics::default_step(x, order);
  const auto& s = d.support();
  if (std::isfinite(s.lo)) h = std::min(h, 0.5 * (x - s.lo));
  if (std::isfinite(s.hi)) h = std::min(h, 0.5 * (s.hi - x));
  for (double p : d.nondiff_points()) {
    if (p != x) h = std::min(h, 0.5 * std::abs(x - p));
  }
  return h;
}

}  // namespace

double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

bool SupportInterval::whole_line() const { return std::isinf(lo) && std::isinf(hi); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Density::Density(DensityDef def) {
  if (!def.log_pdf) fail(ErrorCode::InvalidArgument, "density needs a log-density");
  if (!(def.support.lo < def.support.hi)) {
    fail(ErrorCode::InvalidArgument, "density support requires lo < hi");
  }
  std::sort(def.nondiff_points.begin(), def.nondiff_points.end());
  def_ = std::make_shared<const DensityDef>(std::move(def));
}

double Density::log_pdf(double x) const { return def_->log_pdf(x); }

double Density::pdf(double x) const {
  if (!def_->support.interior(x)) return 0.0;
  return std::exp(def_->log_pdf(x));
}

bool Density::is_nondiff_point(double x) const {
  return std::find(def_->nondiff_points.begin(), def_->nondiff_points.end(), x) !=
         def_->nondiff_points.end();
}

double Density::score(double x) const {
  if (def_->score) return (*def_->score)(x);
  const auto lp = [this](double t) { return def_->log_pdf(t); };
  return numerics::central_diff(lp, x, 1, safe_step(*this, x, 1));
}

double Density::score_prime(double x) const {
  if (def_->score_prime) return (*def_->score_prime)(x);
  if (def_->score) {
    return numerics::central_diff(*def_->score, x, 1, safe_step(*this, x, 1));
  }
  const auto lp = [this](double t) { return def_->log_pdf(t); };
  return numerics::central_diff(lp, x, 2, safe_step(*this, x, 2));
}

double Density::cdf(double x) const {
  if (def_->cdf) return (*def_->cdf)(x);
  const auto& s = def_->support;
  if (x <= s.lo) return 0.0;
  if (x >= s.hi) return 1.0;
  const auto f = [this](double t) { return pdf(t); };
  return std::clamp(numerics::integrate(f, s.lo, x, def_->nondiff_points), 0.0, 1.0);
}

double Density::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  if (def_->quantile) return (*def_->quantile)(p);
  const auto& s = def_->support;
  const auto g = [&](double x) { return cdf(x) - p; };
  const double centre = std::isfinite(s.lo) && std::isfinite(s.hi) ? 0.5 * (s.lo + s.hi)
                        : std::isfinite(s.lo)                       ? s.lo + 1.0
                        : std::isfinite(s.hi)                       ? s.hi - 1.0
                                                                    : 0.0;
  double lo = centre;
  double hi = centre;
  double width = 1.0;
  for (int i = 0; i < 200 && g(lo) > 0.0; ++i, width *= 2.0) {
    lo = std::isfinite(s.lo) ? s.lo + (lo - s.lo) * 0.5 : centre - width;
  }
  width = 1.0;
  for (int i = 0; i < 200 && g(hi) < 0.0; ++i, width *= 2.0) {
    hi = std::isfinite(s.hi) ? s.hi - (s.hi - hi) * 0.5 : centre + width;
  }
  if (lo == hi) return lo;
  const double tol = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  return numerics::find_root(g, numerics::Bracket::around(g, lo, hi), tol);
}

double Density::sample(Rng& rng) const {
  if (def_->sampler) return def_->sampler(rng);
  return quantile(uniform_open(rng));
}

std::vector<std::string> builtin_families() {
  return {"normal", "exponential", "laplace", "gumbel", "student", "gamma", "logistic"};
}

Density make_builtin(const std::string& family, const Params& params) {
  ParamReader r(family, params);
  if (family == "normal") return normal(r);
  if (family == "exponential") return exponential(r);
  if (family == "laplace") return laplace(r);
  if (family == "gumbel") return gumbel(r);
  if (family == "student") return student(r);
  if (family == "gamma") return gamma(r);
  if (family == "logistic") return logistic(r);
  fail(ErrorCode::UnknownFamily, "unknown density family '" + family + "'");
}

Density make_from_expression(const ExpressionDensitySpec& spec) {
  const auto e = expr::Expression::parse(spec.log_pdf, spec.constants);
  if (!(spec.support.lo < spec.support.hi)) {
    fail(ErrorCode::InvalidArgument, "density support requires lo < hi");
  }
  const auto unnormalized = [&](double x) {
    const double v = e(x);
    return std::isnan(v) ? v : std::exp(v);
  };
  double z = 0.0;
  try {
    z = numerics::integrate(unnormalized, spec.support.lo, spec.support.hi, spec.nondiff_points);
  } catch (const Error& err) {
    fail(ErrorCode::NotIntegrable, "exp(" + spec.log_pdf + ") is not integrable: " + err.what());
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    fail(ErrorCode::NotIntegrable, "exp(" + spec.log_pdf + ") does not normalize");
  }
  const double log_z = std::log(z);
  DensityDef d;
  d.name = spec.name;
  d.support = spec.support;
  d.log_pdf = [e, log_z](double x) { return e(x) - log_z; };
  d.score = [e](double x) { return e.derivative(x); };
  d.score_prime = [e](double x) { return e.second_derivative(x); };
  d.symmetric = spec.symmetric;
  d.params = spec.constants;
  d.nondiff_points = spec.nondiff_points;
  return Density(std::move(d));
}

ScoreEvaluation location_score(const Density& d, double x) {
  if (!d.support().interior(x)) {
    std::ostringstream os;
    os << "x = " << x << " is outside the open support of " << d.name();
    fail(ErrorCode::OutOfSupport, os.str());
  }
  if (d.is_nondiff_point(x)) {
    std::ostringstream os;
    os << d.name() << " has no score at x = " << x;
    fail(ErrorCode::NonDifferentiablePoint, os.str());
  }
  const double phi = d.score(x);
  return {x, phi, 1.0 + x * phi,
          d.has_analytic_score() ? ScoreSource::Analytic : ScoreSource::FiniteDifference};
}

ScoreEvaluation scale_score(const Density& d, double x) { return location_score(d, x); }

double expect(const Density& d, const RealFn& h, const numerics::QuadratureSpec& spec) {
  const auto f = [&](double x) {
    const double p = d.pdf(x);
    return p == 0.0 ? 0.0 : h(x) * p;
  };
  return numerics::integrate(f, d.support().lo, d.support().hi, d.nondiff_points(), spec);
}

double score_zero_mean_check(const Density& d) {
  const auto& s = d.support();
  for (double end : {s.lo, s.hi}) {
    if (std::isinf(end)) continue;
    const double inward = end == s.lo ? 1.0 : -1.0;
    const double x = end + inward * 1e-12 * std::max(1.0, std::abs(end));
    if (d.pdf(x) > 1e-8) {
      std::ostringstream os;
      os << d.name() << " does not vanish at the support end " << end;
      fail(ErrorCode::BoundaryViolation, os.str());
    }
  }
  return expect(d, [&](double x) { return d.score(x); });
}

Density power_density(const Density& d, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    fail(ErrorCode::InvalidParameter, "power_density exponent must be positive");
  }
  const auto& s = d.support();
  const auto powered = [&](double x) {
    if (!s.interior(x)) return 0.0;
    return std::exp(c * d.log_pdf(x));
  };
  double z = 0.0;
  std::ostringstream name;
  name << "power(" << d.name() << "," << c << ")";
  try {
    z = numerics::integrate(powered, s.lo, s.hi, d.nondiff_points());
  } catch (const Error& err) {
    fail(ErrorCode::NotIntegrable, name.str() + " is not integrable: " + err.what());
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    fail(ErrorCode::NotIntegrable, name.str() + " does not normalize");
  }
  const double log_z = std::log(z);
  DensityDef q;
  q.name = name.str();
  q.support = s;
  q.log_pdf = [d, c, log_z](double x) { return c * d.log_pdf(x) - log_z; };
  q.score = [d, c](double x) { return c * d.score(x); };
  q.score_prime = [d, c](double x) { return c * d.score_prime(x); };
  q.symmetric = d.symmetric();
  q.params = d.params();
  q.params["power"] = c;
  q.nondiff_points = d.nondiff_points();
  q.piecewise_constant_score = d.piecewise_constant_score();
  return Density(std::move(q));
}

std::pair<double, double> central_region(const Density& d, double mass) {
  if (!(mass > 0.0 && mass < 1.0)) fail(ErrorCode::InvalidArgument, "mass must lie in (0, 1)");
  return {d.quantile(0.5 * (1.0 - mass)), d.quantile(0.5 * (1.0 + mass))};
}

std::vector<double> central_grid(const Density& d, double mass, int count) {
  const auto [lo, hi] = central_region(d, mass);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1);
    if (d.support().interior(x) && !d.is_nondiff_point(x)) grid.push_back(x);
  }
  return grid;
}

bool is_log_concave(const Density& d, bool strict) {
  const auto grid = central_grid(d, 0.999, 401);
  if (strict) {
    return std::all_of(grid.begin(), grid.end(), [&](double x) { return -d.score_prime(x) > 1e-10; });
  }
  double prev = d.score(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = d.score(grid[i]);
    if (cur > prev + 1e-9 * (1.0 + std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

std::vector<double> draw_sample(const Density& d, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = d.sample(rng);
  return out;
}

}  // namespace scorekit
