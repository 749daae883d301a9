#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "scorekit/numerics.hpp"

namespace scorekit {

using numerics::RealFn;
using Rng = std::mt19937_64;
using Params = std::map<std::string, double>;

/// Uniform draw on the open interval (0, 1) built from the top 53 bits of
/// the engine output, so streams are reproducible across standard libraries.
double uniform_open(Rng& rng);

struct SupportInterval {
  double lo = -numerics::kInf;
  double hi = numerics::kInf;

  bool interior(double x) const { return x > lo && x < hi; }
  bool whole_line() const;
};

enum class ScoreSource { Analytic, FiniteDifference };

struct ScoreEvaluation {
  double x;
  double phi;  // location score (log p)'(x)
  double psi;  // scale score 1 + x * phi
  ScoreSource source;
};

/// Everything that defines a density. All callables act on the normalized
/// density. Optional members are closed forms; missing ones are recovered
/// numerically.
struct DensityDef {
  std::string name;
  SupportInterval support;
  RealFn log_pdf;
  std::optional<RealFn> score;        // (log p)'
  std::optional<RealFn> score_prime;  // (log p)''
  std::optional<RealFn> cdf;
  std::optional<RealFn> quantile;
  std::function<double(Rng&)> sampler;
  bool symmetric = false;
  Params params;
  /// Points where the score is undefined (Laplace median, zero of the
  /// singular scale pair).
  std::vector<double> nondiff_points;
  /// Score is piecewise constant between nondiff points (Laplace).
  bool piecewise_constant_score = false;
};

/// Immutable, cheaply copyable handle to a density.
class Density {
 public:
  explicit Density(DensityDef def);

  const std::string& name() const { return def_->name; }
  const SupportInterval& support() const { return def_->support; }
  bool symmetric() const { return def_->symmetric; }
  const Params& params() const { return def_->params; }
  const std::vector<double>& nondiff_points() const { return def_->nondiff_points; }
  bool piecewise_constant_score() const { return def_->piecewise_constant_score; }
  bool has_analytic_score() const { return def_->score.has_value(); }
  const DensityDef& def() const { return *def_; }

  double log_pdf(double x) const;
  /// Zero outside the open support.
  double pdf(double x) const;
  bool is_nondiff_point(double x) const;

  /// Raw location score, no support or differentiability checks. Prefer
  /// location_score() for user-facing evaluation.
  double score(double x) const;
  /// Derivative of the location score.
  double score_prime(double x) const;

  double cdf(double x) const;
  double quantile(double p) const;
  double sample(Rng& rng) const;

 private:
  std::shared_ptr<const DensityDef> def_;
};

/// Built-in families and their parameters (defaults in brackets):
///   normal(mu [0], sigma [1]), exponential(lambda [1]), laplace(mu [0], b [1]),
///   gumbel(mu [0], beta [1]), student(nu [5], mu [0], sigma [1]),
///   gamma(k [3], scale [1]), logistic(mu [0], s [1])
Density make_builtin(const std::string& family, const Params& params = {});
std::vector<std::string> builtin_families();

struct ExpressionDensitySpec {
  std::string log_pdf;  // unnormalized log-density in x
  SupportInterval support;
  bool symmetric = false;
  Params constants;
  std::vector<double> nondiff_points;
  std::string name = "custom";
};

/// Density from an unnormalized log-density expression. The normalizing
/// constant is computed once by quadrature; the score comes from forward-mode
/// differentiation of the expression.
Density make_from_expression(const ExpressionDensitySpec& spec);

ScoreEvaluation location_score(const Density& d, double x);
ScoreEvaluation scale_score(const Density& d, double x);

/// E[phi_p(Z)], which vanishes when p vanishes at both support ends.
double score_zero_mean_check(const Density& d);

/// Normalized density proportional to p^c.
Density power_density(const Density& d, double c);

/// E[h(Z)] under d, split at the density's non-differentiable points.
/// Nodes where p underflows to zero contribute zero without calling h.
double expect(const Density& d, const RealFn& h, const numerics::QuadratureSpec& spec = {});

/// Interval carrying the central `mass` of probability.
std::pair<double, double> central_region(const Density& d, double mass);

/// `count` evenly spaced points over the central region, skipping
/// non-differentiable points.
std::vector<double> central_grid(const Density& d, double mass, int count);

/// Grid check that the score is non-increasing (strict: decreasing) over the
/// central 99.9% region. Heuristic, not a proof.
bool is_log_concave(const Density& d, bool strict);

std::vector<double> draw_sample(const Density& d, std::size_t n, std::uint64_t seed);

/// Normal cdf and pdf shared by several modules.
double std_normal_pdf(double x);
double std_normal_cdf(double x);

}  // namespace scorekit
