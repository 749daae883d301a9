#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scorekit/density.hpp"
#include "scorekit/numerics.hpp"

namespace scorekit::mle {

struct ScoreEquationSolution {
  double estimate = 0.0;
  double residual = 0.0;  // score sum at the estimate
  int iterations = 0;
  numerics::Bracket bracket_used{};
  /// Set when the score sum vanishes on a whole interval (Laplace with even
  /// n); the estimate is its midpoint.
  std::optional<std::pair<double, double>> flat_interval;
};

/// Root in mu of sum_i phi_d(x_i - mu). Needs a non-increasing score that
/// changes sign (NotLogConcave / NoCrossing otherwise). For piecewise
/// constant scores the sample median is returned.
ScoreEquationSolution solve_location_mle(const Density& d, std::span<const double> sample);

/// Root in s of sum_i psi_d(x_i / s), the stationarity condition of the
/// scale family (1/s) d(x/s).
ScoreEquationSolution solve_scale_mle(const Density& d, std::span<const double> sample);

enum class Kind { Location, Scale };
enum class Reference { Mean, Median, Rms };

std::string to_string(Kind k);
std::string to_string(Reference r);
Kind kind_from_string(const std::string& s);
Reference reference_from_string(const std::string& s);

double reference_estimate(Reference r, std::span<const double> sample);

struct CharacterizationReport {
  std::string density;
  Kind kind = Kind::Location;
  Reference reference = Reference::Mean;
  int n_trials = 0;
  int sample_size = 0;
  std::uint64_t seed = 0;
  double max_abs_gap = 0.0;
  int failures = 0;  // trials whose solve threw
};

/// Draws n_trials samples (trial t seeded with seed + t), solves the score
/// equation on each and records the largest gap to the reference estimator.
/// Trials run in parallel; the report matches the serial version exactly.
CharacterizationReport verify_characterization(const Density& d, Kind kind, Reference reference,
                                               int n_trials, int sample_size, std::uint64_t seed);

CharacterizationReport verify_characterization_serial(const Density& d, Kind kind,
                                                      Reference reference, int n_trials,
                                                      int sample_size, std::uint64_t seed);

/// max over pairs of |score(a + b) - score(a) - score(b)|.
double cauchy_additivity_check(const RealFn& score, std::span<const std::pair<double, double>> grid);

/// Sample configurations that reduce the score equation for the mean to
/// the Cauchy functional equation.
namespace witness {
std::vector<double> all_zero(int n);
std::vector<double> symmetric_pair(double a, int n);  // a, -a, 0, ...
std::vector<double> triple(double a, double b, int n);  // a, b, -a-b, 0, ...
}  // namespace witness

/// sum_i phi(x_i - mean(x)): zero on every sample iff the mean solves the
/// location score equation.
double mean_score_residual(const RealFn& score, std::span<const double> sample);

struct PowerFit {
  double c = 0.0;
  double max_residual = 0.0;
  /// False when the score of p is only weakly monotone (e.g. Laplace); the
  /// fit then relies on the weaker zero-crossing condition.
  bool strictly_monotone = true;
};

/// Least-squares c through the origin of phi_g against phi_p over a
/// 101-point grid on the central 99% of p.
PowerFit fit_power_relation(const Density& g, const Density& p);

}  // namespace scorekit::mle
