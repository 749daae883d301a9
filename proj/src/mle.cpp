#include "scorekit/mle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scorekit/error.hpp"
#include "scorekit/parallel.hpp"

namespace scorekit::mle {

namespace {

constexpr int kMaxExpansions = 200;

void require_sample(std::span<const double> sample) {
  if (sample.empty()) fail(ErrorCode::EmptySample, "score equation needs at least one observation");
  for (double x : sample) {
    if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "sample contains a non-finite value");
  }
}

// Score with the two-sided average at kinks, so the sign-sum of Laplace
// counts an observation sitting on the median as zero.
double two_sided_score(const Density& d, double y) {
  if (!d.is_nondiff_point(y)) return d.score(y);
  const double h = 1e-7 * std::max(1.0, std::abs(y));
  return 0.5 * (d.score(y - h) + d.score(y + h));
}

double score_sum(const Density& d, std::span<const double> sample, double mu) {
  numerics::CompensatedSum s;
  for (double x : sample) s.add(two_sided_score(d, x - mu));
  return s.value();
}

void require_crossing(const Density& d) {
  const auto [lo, hi] = central_region(d, 0.999);
  const auto grid = central_grid(d, 0.999, 401);
  bool pos = false;
  bool neg = false;
  for (double x : grid) {
    const double v = d.score(x);
    pos = pos || v > 0.0;
    neg = neg || v < 0.0;
  }
  if (!(pos && neg)) {
    std::ostringstream os;
    os << "score of " << d.name() << " does not change sign on [" << lo << ", " << hi << "]";
    fail(ErrorCode::NoCrossing, os.str());
  }
}

// Moves x toward `limit`: geometric steps when the limit is infinite,
// halving the remaining distance otherwise.
double step_toward(double x, double limit, double& step) {
  if (std::isinf(limit)) {
    const double out = limit > 0 ? x + step : x - step;
    step *= 2.0;
    return out;
  }
  return x + 0.5 * (limit - x);
}

ScoreEquationSolution median_solution(const Density& d, std::span<const double> sample) {
  std::vector<double> v(sample.begin(), sample.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  ScoreEquationSolution out;
  if (n % 2 == 1) {
    out.estimate = v[n / 2];
  } else {
    const double a = v[n / 2 - 1];
    const double b = v[n / 2];
    out.estimate = 0.5 * (a + b);
    if (a < b) out.flat_interval = std::make_pair(a, b);
  }
  out.residual = score_sum(d, sample, out.estimate);
  out.bracket_used = {v.front(), v.back(), score_sum(d, sample, v.front()),
                      score_sum(d, sample, v.back())};
  return out;
}

}  // namespace

ScoreEquationSolution solve_location_mle(const Density& d, std::span<const double> sample) {
  require_sample(sample);
  if (!is_log_concave(d, false)) {
    fail(ErrorCode::NotLogConcave, d.name() + " has a score that is not non-increasing");
  }
  require_crossing(d);
  if (d.piecewise_constant_score()) return median_solution(d, sample);

  const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
  const auto& s = d.support();
  // x_i - mu must stay inside the support for every i.
  const double mu_min = *mx - s.hi;
  const double mu_max = *mn - s.lo;
  if (!(mu_min < mu_max)) {
    fail(ErrorCode::OutOfSupport, "sample spread exceeds the support width of " + d.name());
  }
  const double width = std::max(*mx - *mn, 1.0);
  double lo = *mn;
  double hi = *mx;
  if (!(lo > mu_min && lo < mu_max)) lo = std::isinf(mu_min) ? mu_max - width : 0.5 * (mu_min + mu_max);
  if (!(hi > mu_min && hi < mu_max)) hi = std::isinf(mu_max) ? mu_min + width : 0.5 * (mu_min + mu_max);
  if (!(lo < hi)) hi = std::isinf(mu_max) ? lo + width : lo + 0.5 * (mu_max - lo);

  // h(mu) is non-decreasing in mu.
  const auto h = [&](double mu) { return score_sum(d, sample, mu); };
  double h_lo = h(lo);
  double h_hi = h(hi);
  double step_lo = width;
  double step_hi = width;
  for (int i = 0; i < kMaxExpansions && h_lo > 0.0; ++i) {
    lo = step_toward(lo, mu_min, step_lo);
    h_lo = h(lo);
  }
  for (int i = 0; i < kMaxExpansions && h_hi < 0.0; ++i) {
    hi = step_toward(hi, mu_max, step_hi);
    h_hi = h(hi);
  }
  const numerics::Bracket bracket{lo, hi, h_lo, h_hi};
  if (!bracket.valid()) {
    fail(ErrorCode::NoCrossing, "location score sum of " + d.name() + " has no sign change");
  }
  const double scale = std::max({1.0, std::abs(*mn), std::abs(*mx)});
  const auto r = numerics::find_root_detailed(h, bracket, 1e-14 * scale);
  return {r.root, r.residual, r.iterations, bracket, std::nullopt};
}

ScoreEquationSolution solve_scale_mle(const Density& d, std::span<const double> sample) {
  require_sample(sample);
  const auto& s = d.support();
  if (!((s.lo == 0.0 || s.lo == -numerics::kInf) && (s.hi == 0.0 || s.hi == numerics::kInf))) {
    fail(ErrorCode::InvalidArgument, "support of " + d.name() + " is not closed under scaling");
  }
  double max_abs = 0.0;
  for (double x : sample) {
    if (!s.interior(x) && !(x == 0.0 && s.whole_line())) {
      std::ostringstream os;
      os << "observation " << x << " lies outside the support of " << d.name();
      fail(ErrorCode::OutOfSupport, os.str());
    }
    max_abs = std::max(max_abs, std::abs(x));
  }
  if (max_abs == 0.0) fail(ErrorCode::NoCrossing, "all observations are zero");

  // Solve in t = log s.
  const auto h = [&](double t) {
    const double sc = std::exp(t);
    numerics::CompensatedSum acc;
    for (double x : sample) {
      const double y = x / sc;
      acc.add(1.0 + y * two_sided_score(d, y));
    }
    return acc.value();
  };
  const double t0 = std::log(max_abs);
  double lo = t0 - 1.0;
  double hi = t0 + 1.0;
  double h_lo = h(lo);
  double h_hi = h(hi);
  double step = 1.0;
  for (int i = 0; i < 60 && !(h_lo <= 0.0 && h_hi >= 0.0); ++i) {
    step *= 2.0;
    if (h_lo > 0.0) h_lo = h(lo -= step);
    if (h_hi < 0.0) h_hi = h(hi += step);
    if (std::isnan(h_lo) || std::isnan(h_hi)) break;
  }
  const numerics::Bracket bracket{lo, hi, h_lo, h_hi};
  if (!(h_lo <= 0.0 && h_hi >= 0.0) || !bracket.valid()) {
    fail(ErrorCode::NoCrossing, "scale score sum of " + d.name() + " has no sign change in s");
  }
  const auto r = numerics::find_root_detailed(h, bracket, 1e-15);
  const numerics::Bracket in_s{std::exp(lo), std::exp(hi), h_lo, h_hi};
  return {std::exp(r.root), r.residual, r.iterations, in_s, std::nullopt};
}

std::string to_string(Kind k) { return k == Kind::Location ? "location" : "scale"; }

std::string to_string(Reference r) {
  switch (r) {
    case Reference::Mean: return "mean";
    case Reference::Median: return "median";
    case Reference::Rms: return "rms";
  }
  return "mean";
}

Kind kind_from_string(const std::string& s) {
  if (s == "location") return Kind::Location;
  if (s == "scale") return Kind::Scale;
  fail(ErrorCode::InvalidArgument, "unknown estimation kind '" + s + "' (location|scale)");
}

Reference reference_from_string(const std::string& s) {
  if (s == "mean") return Reference::Mean;
  if (s == "median") return Reference::Median;
  if (s == "rms") return Reference::Rms;
  fail(ErrorCode::InvalidArgument, "unknown reference estimator '" + s + "' (mean|median|rms)");
}

double reference_estimate(Reference r, std::span<const double> sample) {
  if (sample.empty()) fail(ErrorCode::EmptySample, "reference estimator of an empty sample");
  numerics::CompensatedSum acc;
  switch (r) {
    case Reference::Mean:
      for (double x : sample) acc.add(x);
      return acc.value() / static_cast<double>(sample.size());
    case Reference::Rms:
      for (double x : sample) acc.add(x * x);
      return std::sqrt(acc.value() / static_cast<double>(sample.size()));
    case Reference::Median: {
      std::vector<double> v(sample.begin(), sample.end());
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
  }
  return 0.0;
}

namespace {

void check_trial_args(int n_trials, int sample_size) {
  if (n_trials < 1) fail(ErrorCode::InvalidArgument, "n_trials must be at least 1");
  if (sample_size < 3) fail(ErrorCode::InvalidArgument, "sample_size must be at least 3");
}

// NaN marks a failed trial.
double trial_gap(const Density& d, Kind kind, Reference reference, int sample_size,
                 std::uint64_t seed) {
  const auto x = draw_sample(d, static_cast<std::size_t>(sample_size), seed);
  try {
    const auto sol = kind == Kind::Location ? solve_location_mle(d, x) : solve_scale_mle(d, x);
    return std::abs(sol.estimate - reference_estimate(reference, x));
  } catch (const Error&) {
    return std::nan("");
  }
}

CharacterizationReport summarize(const Density& d, Kind kind, Reference reference, int n_trials,
                                 int sample_size, std::uint64_t seed,
                                 const std::vector<double>& gaps) {
  CharacterizationReport r{d.name(), kind, reference, n_trials, sample_size, seed, 0.0, 0};
  for (double g : gaps) {
    if (std::isnan(g)) {
      ++r.failures;
    } else {
      r.max_abs_gap = std::max(r.max_abs_gap, g);
    }
  }
  return r;
}

}  // namespace

CharacterizationReport verify_characterization(const Density& d, Kind kind, Reference reference,
                                               int n_trials, int sample_size, std::uint64_t seed) {
  check_trial_args(n_trials, sample_size);
  std::vector<double> gaps(static_cast<std::size_t>(n_trials));
  parallel::for_each_index(gaps.size(), [&](std::size_t t) {
    gaps[t] = trial_gap(d, kind, reference, sample_size, seed + t);
  });
  return summarize(d, kind, reference, n_trials, sample_size, seed, gaps);
}

CharacterizationReport verify_characterization_serial(const Density& d, Kind kind,
                                                      Reference reference, int n_trials,
                                                      int sample_size, std::uint64_t seed) {
  check_trial_args(n_trials, sample_size);
  std::vector<double> gaps(static_cast<std::size_t>(n_trials));
  for (std::size_t t = 0; t < gaps.size(); ++t) {
    gaps[t] = trial_gap(d, kind, reference, sample_size, seed + t);
  }
  return summarize(d, kind, reference, n_trials, sample_size, seed, gaps);
}

double cauchy_additivity_check(const RealFn& score,
                               std::span<const std::pair<double, double>> grid) {
  double worst = 0.0;
  for (const auto& [a, b] : grid) {
    const double r = std::abs(score(a + b) - score(a) - score(b));
    if (std::isnan(r)) fail(ErrorCode::NonFinite, "score is not finite on the grid");
    worst = std::max(worst, r);
  }
  return worst;
}

namespace witness {

std::vector<double> all_zero(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "witness size must be positive");
  return std::vector<double>(static_cast<std::size_t>(n), 0.0);
}

std::vector<double> symmetric_pair(double a, int n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "symmetric pair witness needs n >= 2");
  auto v = all_zero(n);
  v[0] = a;
  v[1] = -a;
  return v;
}

std::vector<double> triple(double a, double b, int n) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "triple witness needs n >= 3");
  auto v = all_zero(n);
  v[0] = a;
  v[1] = b;
  v[2] = -a - b;
  return v;
}

}  // namespace witness

double mean_score_residual(const RealFn& score, std::span<const double> sample) {
  const double m = reference_estimate(Reference::Mean, sample);
  numerics::CompensatedSum acc;
  for (double x : sample) acc.add(score(x - m));
  return acc.value();
}

PowerFit fit_power_relation(const Density& g, const Density& p) {
  const auto grid = central_grid(p, 0.99, 101);
  std::vector<double> sp(grid.size());
  std::vector<double> sg(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sp[i] = location_score(p, grid[i]).phi;
    sg[i] = location_score(g, grid[i]).phi;
  }
  bool up = true;
  bool down = true;
  bool strict = true;
  for (std::size_t i = 1; i < sp.size(); ++i) {
    const double diff = sp[i] - sp[i - 1];
    up = up && diff >= 0.0;
    down = down && diff <= 0.0;
    strict = strict && diff != 0.0;
  }
  const auto [lo, hi] = std::minmax_element(sp.begin(), sp.end());
  const bool crosses = *lo < 0.0 && *hi > 0.0;
  if (!(up || down) || !crosses) {
    fail(ErrorCode::NotMonotone,
         "score of " + p.name() + " is not monotone through zero on its central region");
  }

  numerics::CompensatedSum num;
  numerics::CompensatedSum den;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    num.add(sg[i] * sp[i]);
    den.add(sp[i] * sp[i]);
  }
  PowerFit out;
  out.c = num.value() / den.value();
  out.strictly_monotone = strict;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    out.max_residual = std::max(out.max_residual, std::abs(sg[i] - out.c * sp[i]));
  }
  return out;
}

}  // namespace scorekit::mle
