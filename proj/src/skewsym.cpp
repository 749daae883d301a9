#include "scorekit/skewsym.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "scorekit/error.hpp"
#include "scorekit/parallel.hpp"

namespace scorekit::skewsym {

namespace {

const numerics::QuadratureSpec kInfoSpec{1e-12, 1e-11, 4000};

// Average of the one-sided limits, used where a score jumps.
double two_sided(const RealFn& f, double z) {
  const double h = 1e-9 * std::max(1.0, std::abs(z));
  return 0.5 * (f(z - h) + f(z + h));
}

void check_parity(const SkewingArgument& w, const std::vector<double>& skip) {
  for (int i = 1; i <= 50; ++i) {
    const double z = 0.1 * i + 0.0123;
    if (std::find(skip.begin(), skip.end(), z) != skip.end()) continue;
    const double a = w(z);
    const double b = w(-z);
    const double gap = w.parity() == Parity::Odd ? std::abs(a + b) : std::abs(a - b);
    if (gap > 1e-9 * (1.0 + std::abs(a))) {
      std::ostringstream os;
      os << "skewing argument '" << w.label() << "' is not "
         << (w.parity() == Parity::Odd ? "odd" : "even") << " (checked at z = " << z << ")";
      fail(ErrorCode::ParityViolation, os.str());
    }
  }
}

void require_symmetric(const Density& p, const std::string& role) {
  if (!p.symmetric()) fail(ErrorCode::NotSymmetric, role + " density '" + p.name() + "' is not symmetric");
}

double integrate_base(const SkewSymmetricModel& m, const RealFn& h) {
  const auto& q = m.base();
  const auto f = [&](double z) {
    const double p = q.pdf(z);
    return p == 0.0 ? 0.0 : h(z) * p;
  };
  return numerics::integrate(f, q.support().lo, q.support().hi, m.z_breakpoints(), kInfoSpec);
}

FisherInfoResult analyze(const SkewSymmetricModel& m, const numerics::Matrix3& info, double rank_tol) {
  FisherInfoResult r;
  r.matrix = info;
  const auto eig = numerics::eig_sym3(info);
  r.eigenvalues = eig.values;
  const double lmax = eig.values[2];
  if (!(lmax > 0.0) || !std::isfinite(lmax)) {
    fail(ErrorCode::DegenerateBase, "information matrix has no positive eigenvalue");
  }
  r.min_rel_eigenvalue = eig.values[0] / lmax;
  r.rank_at_tol = static_cast<int>(
      std::count_if(eig.values.begin(), eig.values.end(), [&](double v) { return v > rank_tol * lmax; }));
  if (r.rank_at_tol < 3) r.collinearity = fit_collinearity(m);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// SkewingCdf

SkewingCdf SkewingCdf::normal() { return {Kind::Normal, 0.0, "normal"}; }
SkewingCdf SkewingCdf::logistic() { return {Kind::Logistic, 0.0, "logistic"}; }

SkewingCdf SkewingCdf::student(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorCode::InvalidParameter, "student skewing cdf needs nu > 0");
  std::ostringstream os;
  os << "student(" << nu << ")";
  return {Kind::Student, nu, os.str()};
}

SkewingCdf SkewingCdf::from_name(const std::string& name, double nu) {
  if (name == "normal") return normal();
  if (name == "logistic") return logistic();
  if (name == "student") return student(nu);
  fail(ErrorCode::UnknownFamily, "unknown skewing cdf '" + name + "'");
}

double SkewingCdf::cdf(double t) const {
  switch (kind_) {
    case Kind::Normal: return std_normal_cdf(t);
    case Kind::Logistic: return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
    case Kind::Student: return boost::math::cdf(boost::math::students_t_distribution<double>(nu_), t);
  }
  return std::nan("");
}

double SkewingCdf::pdf(double t) const {
  switch (kind_) {
    case Kind::Normal: return std_normal_pdf(t);
    case Kind::Logistic: {
      const double e = std::exp(-std::abs(t));
      return e / ((1.0 + e) * (1.0 + e));
    }
    case Kind::Student: return boost::math::pdf(boost::math::students_t_distribution<double>(nu_), t);
  }
  return std::nan("");
}

// ---------------------------------------------------------------------------
// SkewingArgument

SkewingArgument SkewingArgument::identity() { return {Kind::Identity, Parity::Odd, "identity"}; }

SkewingArgument SkewingArgument::location_score(const Density& p) {
  require_symmetric(p, "location-score argument");
  SkewingArgument a(Kind::LocationScore, Parity::Odd, "location_score(" + p.name() + ")");
  a.p_ = p;
  check_parity(a, p.nondiff_points());
  return a;
}

SkewingArgument SkewingArgument::scale_score(const Density& p) {
  require_symmetric(p, "scale-score argument");
  SkewingArgument a(Kind::ScaleScore, Parity::Even, "scale_score(" + p.name() + ")");
  a.p_ = p;
  check_parity(a, p.nondiff_points());
  return a;
}

SkewingArgument SkewingArgument::skew_t(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorCode::InvalidParameter, "skew_t argument needs nu > 0");
  std::ostringstream os;
  os << "skew_t(" << nu << ")";
  SkewingArgument a(Kind::SkewT, Parity::Odd, os.str());
  a.nu_ = nu;
  return a;
}

SkewingArgument SkewingArgument::custom(RealFn w, Parity parity, std::string label) {
  SkewingArgument a(Kind::Custom, parity, std::move(label));
  a.w_ = std::move(w);
  check_parity(a, {});
  return a;
}

double SkewingArgument::operator()(double z) const {
  switch (kind_) {
    case Kind::Identity: return z;
    case Kind::SkewT: return z * std::sqrt((nu_ + 1.0) / (nu_ + z * z));
    case Kind::Custom: return w_(z);
    case Kind::LocationScore:
    case Kind::ScaleScore: {
      const Density& p = *p_;
      const RealFn f = kind_ == Kind::LocationScore ? RealFn([&p](double t) { return p.score(t); })
                                                    : RealFn([&p](double t) { return 1.0 + t * p.score(t); });
      return p.is_nondiff_point(z) ? two_sided(f, z) : f(z);
    }
  }
  return std::nan("");
}

std::vector<double> SkewingArgument::nondiff_points() const {
  return p_ ? p_->nondiff_points() : std::vector<double>{};
}

// ---------------------------------------------------------------------------
// SkewSymmetricModel

SkewSymmetricModel::SkewSymmetricModel(Density base, SkewingCdf skewing_cdf, SkewingArgument arg,
                                       double mu, double sigma, double delta)
    : base_(std::move(base)), cdf_(std::move(skewing_cdf)), arg_(std::move(arg)), mu_(mu), sigma_(sigma), delta_(delta) {
  require_symmetric(base_, "base");
  if (!std::isfinite(mu) || !std::isfinite(delta)) fail(ErrorCode::InvalidParameter, "mu and delta must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::InvalidParameter, "sigma must be positive");
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i;
    if (std::abs(cdf_.cdf(t) + cdf_.cdf(-t) - 1.0) > 1e-12) {
      fail(ErrorCode::NotSymmetric, "skewing cdf " + cdf_.name() + " is not symmetric");
    }
  }
  if (arg_.parity() == Parity::Even && delta_ != 0.0) {
    const double c = [&] {
      try {
        return integrate_base(*this, [&](double z) { return 2.0 * cdf_.cdf(delta_ * arg_(z)); });
      } catch (const Error& e) {
        fail(ErrorCode::NormalizationFailure, std::string("normalizing constant failed: ") + e.what());
      }
    }();
    if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorCode::NormalizationFailure, "normalizing constant is not positive");
    normalizer_ = c;
  }
}

SkewSymmetricModel SkewSymmetricModel::with(double mu, double sigma, double delta) const {
  return SkewSymmetricModel(base_, cdf_, arg_, mu, sigma, delta);
}

double SkewSymmetricModel::log_density(double x) const {
  const double z = (x - mu_) / sigma_;
  if (!base_.support().interior(z)) return -numerics::kInf;
  return std::log(2.0 / sigma_) + base_.log_pdf(z) + std::log(cdf_.cdf(delta_ * arg_(z))) -
         std::log(normalizer_);
}

std::vector<double> SkewSymmetricModel::z_breakpoints() const {
  std::vector<double> out = base_.nondiff_points();
  const auto extra = arg_.nondiff_points();
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

double skew_density(const SkewSymmetricModel& m, double x) {
  const double z = (x - m.mu()) / m.sigma();
  if (!m.base().support().interior(z)) return 0.0;
  return std::exp(m.log_density(x));
}

ParameterScores scores_at_symmetry(const SkewSymmetricModel& m) {
  if (m.delta() != 0.0) fail(ErrorCode::InvalidArgument, "scores_at_symmetry requires delta = 0");
  const double mu = m.mu();
  const double sigma = m.sigma();
  const Density q = m.base();
  const SkewingArgument w = m.arg();
  const double slope = 2.0 * m.skewing_cdf().pdf(0.0);
  const double centre = w.parity() == Parity::Even ? integrate_base(m, [&](double z) { return w(z); }) : 0.0;

  ParameterScores s;
  s.mu = [=](double x) { return -location_score(q, (x - mu) / sigma).phi / sigma; };
  s.sigma = [=](double x) { return -location_score(q, (x - mu) / sigma).psi / sigma; };
  s.delta = [=](double x) { return slope * (w((x - mu) / sigma) - centre); };
  return s;
}

double score_crosscheck(const SkewSymmetricModel& m, int points) {
  const auto s = scores_at_symmetry(m);
  const auto grid = central_grid(m.base(), 0.99, points);
  double worst = 0.0;
  for (double z : grid) {
    bool skip = false;
    for (double b : m.z_breakpoints()) skip = skip || std::abs(z - b) < 1e-3;
    if (skip) continue;
    const double x = m.mu() + m.sigma() * z;
    const auto by_mu = [&](double v) { return m.with(v, m.sigma(), 0.0).log_density(x); };
    const auto by_sigma = [&](double v) { return m.with(m.mu(), v, 0.0).log_density(x); };
    const auto by_delta = [&](double v) { return m.with(m.mu(), m.sigma(), v).log_density(x); };
    worst = std::max(worst, std::abs(numerics::central_diff(by_mu, m.mu(), 1) - s.mu(x)));
    worst = std::max(worst, std::abs(numerics::central_diff(by_sigma, m.sigma(), 1) - s.sigma(x)));
    worst = std::max(worst, std::abs(numerics::central_diff(by_delta, 0.0, 1) - s.delta(x)));
  }
  return worst;
}

namespace {

numerics::Matrix3 fisher_entries(const SkewSymmetricModel& m, bool serial) {
  const auto s = scores_at_symmetry(m);
  const std::array<const RealFn*, 3> fns = {&s.mu, &s.sigma, &s.delta};
  constexpr std::array<std::pair<int, int>, 6> kEntries = {{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  std::array<double, 6> values{};
  const auto entry = [&](std::size_t k) {
    const auto [i, j] = kEntries[k];
    values[k] = integrate_base(m, [&](double z) {
      const double x = m.mu() + m.sigma() * z;
      return (*fns[i])(x) * (*fns[j])(x);
    });
  };
  if (serial) {
    for (std::size_t k = 0; k < kEntries.size(); ++k) entry(k);
  } else {
    parallel::for_each_index(kEntries.size(), entry);
  }
  numerics::Matrix3 info{};
  for (std::size_t k = 0; k < kEntries.size(); ++k) {
    const auto [i, j] = kEntries[k];
    info[i][j] = values[k];
    info[j][i] = values[k];
  }
  return info;
}

}  // namespace

numerics::Matrix3 fisher_matrix_serial(const SkewSymmetricModel& m) { return fisher_entries(m, true); }

numerics::Matrix3 fisher_matrix(const SkewSymmetricModel& m) { return fisher_entries(m, false); }

FisherInfoResult fisher_info_at_symmetry(const SkewSymmetricModel& m, double rank_tol) {
  return analyze(m, fisher_matrix(m), rank_tol);
}

Collinearity fit_collinearity(const SkewSymmetricModel& m) {
  const Density& q = m.base();
  const auto& w = m.arg();
  const auto breaks = m.z_breakpoints();
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double z : central_grid(q, 0.99, 401)) {
    if (std::find(breaks.begin(), breaks.end(), z) != breaks.end()) continue;
    const double weight = q.pdf(z);
    if (weight == 0.0) continue;
    const auto sc = location_score(q, z);
    const double y = w.parity() == Parity::Odd ? sc.phi : sc.psi;
    const double x = w(z);
    sw += weight;
    sx += weight * x;
    sy += weight * y;
    sxx += weight * x * x;
    sxy += weight * x * y;
  }
  const double det = sw * sxx - sx * sx;
  if (!(std::abs(det) > 1e-300)) return {0.0, sw > 0.0 ? sy / sw : 0.0};
  return {(sw * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

SingularityReport singularity_report(const SkewSymmetricModel& m, double tol) {
  auto detail = fisher_info_at_symmetry(m, tol);
  const bool singular = detail.rank_at_tol < 3;
  if (singular && !detail.collinearity) detail.collinearity = fit_collinearity(m);
  return {singular, detail};
}

Density construct_singular_scale_pair(const Density& p, double c1, double c2) {
  require_symmetric(p, "scale-pair");
  const double total = c1 + c2;
  const double rounded = std::round(total);
  const bool odd_integer = std::abs(total - rounded) <= 1e-9 && std::fmod(std::abs(rounded), 2.0) == 1.0;
  if (!odd_integer || rounded < 1.0) {
    std::ostringstream os;
    os << "c1 + c2 = " << total << " must be an odd positive integer";
    fail(ErrorCode::ParityViolation, os.str());
  }
  std::ostringstream name;
  name << "scale_pair(" << p.name() << "," << c1 << "," << c2 << ")";
  if (!(c1 > 0.0)) fail(ErrorCode::NotIntegrable, name.str() + " needs c1 > 0 for p^c1 to be integrable");
  const double power = rounded - 1.0;
  const auto& s = p.support();

  const auto unnormalized = [&](double x) {
    if (!s.interior(x) || (power > 0.0 && x == 0.0)) return 0.0;
    return std::exp(power * std::log(std::abs(x)) + c1 * p.log_pdf(x));
  };
  std::vector<double> cuts = p.nondiff_points();
  cuts.push_back(0.0);
  double z = 0.0;
  try {
    z = numerics::integrate(unnormalized, s.lo, s.hi, cuts);
  } catch (const Error& e) {
    fail(ErrorCode::NotIntegrable, name.str() + " is not integrable: " + e.what());
  }
  if (!(z > 0.0) || !std::isfinite(z)) fail(ErrorCode::NotIntegrable, name.str() + " does not normalize");
  const double log_z = std::log(z);

  DensityDef q;
  q.name = name.str();
  q.support = s;
  q.log_pdf = [p, power, c1, log_z](double x) {
    const double lx = power > 0.0 ? power * std::log(std::abs(x)) : 0.0;
    return lx + c1 * p.log_pdf(x) - log_z;
  };
  q.score = [p, power, c1](double x) { return (power > 0.0 ? power / x : 0.0) + c1 * p.score(x); };
  q.score_prime = [p, power, c1](double x) {
    return (power > 0.0 ? -power / (x * x) : 0.0) + c1 * p.score_prime(x);
  };
  q.symmetric = true;
  q.params = {{"c1", c1}, {"c2", c2}};
  q.nondiff_points = p.nondiff_points();
  const bool has_zero = std::find(q.nondiff_points.begin(), q.nondiff_points.end(), 0.0) != q.nondiff_points.end();
  if (power > 0.0 && !has_zero) q.nondiff_points.push_back(0.0);
  return Density(std::move(q));
}

}  // namespace scorekit::skewsym
