#pragma once

#include <array>
#include <optional>
#include <string>

#include "scorekit/density.hpp"
#include "scorekit/numerics.hpp"

namespace scorekit::skewsym {

/// Symmetric univariate cdf F used as skewing function F(delta * w(z)).
class SkewingCdf {
 public:
  static SkewingCdf normal();
  static SkewingCdf logistic();
  static SkewingCdf student(double nu);
  static SkewingCdf from_name(const std::string& name, double nu);

  double cdf(double t) const;
  double pdf(double t) const;
  const std::string& name() const { return name_; }
  double nu() const { return nu_; }

 private:
  enum class Kind { Normal, Logistic, Student };
  SkewingCdf(Kind kind, double nu, std::string name) : kind_(kind), nu_(nu), name_(std::move(name)) {}

  Kind kind_;
  double nu_;
  std::string name_;
};

enum class Parity { Odd, Even };

/// The function w inside F(delta * w(z)).
class SkewingArgument {
 public:
  enum class Kind { Identity, LocationScore, ScaleScore, SkewT, Custom };

  static SkewingArgument identity();
  /// w = phi_p, the location score of a symmetric density p.
  static SkewingArgument location_score(const Density& p);
  /// w = psi_p = 1 + z phi_p(z) (even).
  static SkewingArgument scale_score(const Density& p);
  /// w = z sqrt((nu + 1) / (nu + z^2)).
  static SkewingArgument skew_t(double nu);
  /// Parity is declared and checked on a grid.
  static SkewingArgument custom(RealFn w, Parity parity, std::string label);

  double operator()(double z) const;
  Kind kind() const { return kind_; }
  Parity parity() const { return parity_; }
  const std::string& label() const { return label_; }
  const std::optional<Density>& density() const { return p_; }
  std::vector<double> nondiff_points() const;

 private:
  SkewingArgument(Kind kind, Parity parity, std::string label) : kind_(kind), parity_(parity), label_(std::move(label)) {}

  Kind kind_;
  Parity parity_;
  std::string label_;
  std::optional<Density> p_;
  double nu_ = 0.0;
  RealFn w_;
};

/// (2 / sigma) q(z) F(delta w(z)) / C(delta), z = (x - mu) / sigma.
/// C(delta) = 1 for odd w; for even w it is computed by quadrature.
class SkewSymmetricModel {
 public:
  SkewSymmetricModel(Density base, SkewingCdf skewing_cdf, SkewingArgument arg, double mu = 0.0,
                     double sigma = 1.0, double delta = 0.0);

  const Density& base() const { return base_; }
  const SkewingCdf& skewing_cdf() const { return cdf_; }
  const SkewingArgument& arg() const { return arg_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  double delta() const { return delta_; }
  double normalizer() const { return normalizer_; }

  SkewSymmetricModel with(double mu, double sigma, double delta) const;

  double log_density(double x) const;
  /// Points where the scores may be undefined, in the z scale.
  std::vector<double> z_breakpoints() const;

 private:
  Density base_;
  SkewingCdf cdf_;
  SkewingArgument arg_;
  double mu_;
  double sigma_;
  double delta_;
  double normalizer_ = 1.0;
};

double skew_density(const SkewSymmetricModel& m, double x);

struct ParameterScores {
  RealFn mu;
  RealFn sigma;
  RealFn delta;
};

/// Scores in (mu, sigma, delta) at delta = 0:
///   s_mu    = -phi_q(z) / sigma
///   s_sigma = -psi_q(z) / sigma
///   s_delta = 2 F'(0) (w(z) - E_q[w])
ParameterScores scores_at_symmetry(const SkewSymmetricModel& m);

/// Largest gap between the analytic scores and central differences of the
/// normalized log-density, over `points` grid points of the central 99%.
double score_crosscheck(const SkewSymmetricModel& m, int points = 21);

struct Collinearity {
  double c1;
  double c2;
};

struct FisherInfoResult {
  numerics::Matrix3 matrix{};  // parameter order (mu, sigma, delta)
  std::array<double, 3> eigenvalues{};
  double min_rel_eigenvalue = 0.0;
  int rank_at_tol = 0;
  /// When rank deficient: phi_q = c1 w + c2 (odd w) or psi_q = c1 w + c2
  /// (even w), fitted by base-weighted least squares.
  std::optional<Collinearity> collinearity;
};

/// Information matrix at delta = 0. Entries are integrated in parallel.
FisherInfoResult fisher_info_at_symmetry(const SkewSymmetricModel& m, double rank_tol = 1e-6);

/// Entry integrals only, one thread; reference for the parallel path.
numerics::Matrix3 fisher_matrix_serial(const SkewSymmetricModel& m);
numerics::Matrix3 fisher_matrix(const SkewSymmetricModel& m);

/// q(x) = d |x|^(c1 + c2 - 1) p(x)^c1, whose scale score satisfies
/// psi_q = c1 psi_p + c2. c1 + c2 must be an odd positive integer.
Density construct_singular_scale_pair(const Density& p, double c1, double c2);

struct SingularityReport {
  bool singular;
  FisherInfoResult detail;
};

SingularityReport singularity_report(const SkewSymmetricModel& m, double tol = 1e-6);

Collinearity fit_collinearity(const SkewSymmetricModel& m);

}  // namespace scorekit::skewsym
