#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "scorekit/density.hpp"
#include "scorekit/error.hpp"
#include "scorekit/skewsym.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace scorekit;
using namespace scorekit::skewsym;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

SkewSymmetricModel skew_normal(double mu = 0, double sigma = 1, double delta = 0) {
  return {make_builtin("normal"), SkewingCdf::normal(), SkewingArgument::identity(), mu, sigma, delta};
}

double model_mass(const SkewSymmetricModel& m) {
  return oracle::simpson_split([&](double x) { return skew_density(m, x); }, m.mu() - 60 * m.sigma(),
                               m.mu() + 60 * m.sigma(), {m.mu()}, 20000);
}

const std::vector<SkewingCdf>& cdfs() {
  static const std::vector<SkewingCdf> v = {SkewingCdf::normal(), SkewingCdf::logistic(), SkewingCdf::student(6)};
  return v;
}

}  // namespace

TEST_SUITE("skewsym") {

TEST_CASE("skewing cdfs are symmetric") {
  for (const auto& F : cdfs()) {
    CHECK(F.cdf(0.0) == 0.5);
    for (double t : {0.1, 1.0, 3.0, 10.0}) CHECK(std::abs(F.cdf(t) + F.cdf(-t) - 1.0) <= 1e-12);
  }
  CHECK(SkewingCdf::normal().pdf(0.0) == doctest::Approx(oracle::normal_pdf(0.0)));
  CHECK(SkewingCdf::logistic().pdf(0.0) == doctest::Approx(0.25));
  CHECK(SkewingCdf::from_name("student", 3).nu() == 3.0);
  CHECK(code_of([] { SkewingCdf::from_name("cauchy", 1); }) == ErrorCode::UnknownFamily);
}

TEST_CASE("skewing argument parity") {
  const auto n = make_builtin("normal");
  CHECK(SkewingArgument::identity().parity() == Parity::Odd);
  CHECK(SkewingArgument::location_score(n).parity() == Parity::Odd);
  CHECK(SkewingArgument::scale_score(n).parity() == Parity::Even);
  const auto t = SkewingArgument::skew_t(5);
  CHECK(t.parity() == Parity::Odd);
  CHECK(t(2.0) == doctest::Approx(2.0 * std::sqrt(6.0 / 9.0)));
  CHECK(code_of([] { SkewingArgument::custom([](double z) { return z * z; }, Parity::Odd, "z^2"); }) ==
        ErrorCode::ParityViolation);
  CHECK(code_of([] { SkewingArgument::location_score(make_builtin("gumbel")); }) == ErrorCode::NotSymmetric);
}

TEST_CASE("skew_density examples") {
  const auto m0 = skew_normal();
  for (double x : {-2.0, 0.0, 1.3}) CHECK(skew_density(m0, x) == doctest::Approx(oracle::normal_pdf(x)));
  CHECK(skew_density(skew_normal(0, 1, 1), 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  for (double delta : {-2.0, 0.5, 3.0}) CHECK(std::abs(model_mass(skew_normal(0, 1, delta)) - 1.0) <= 1e-8);
  const auto m = skew_normal(1.0, 2.0, 1.5);
  for (double x : {-1.0, 0.5, 4.0}) {
    const double z = (x - 1.0) / 2.0;
    CHECK(skew_density(m, x) == doctest::Approx(oracle::normal_pdf(z) * oracle::normal_cdf(1.5 * z)).epsilon(1e-12));
  }
}

TEST_CASE("model errors") {
  const auto n = make_builtin("normal");
  CHECK(code_of([&] { SkewSymmetricModel(make_builtin("gumbel"), SkewingCdf::normal(), SkewingArgument::identity()); }) ==
        ErrorCode::NotSymmetric);
  CHECK(code_of([&] { SkewSymmetricModel(n, SkewingCdf::normal(), SkewingArgument::identity(), 0, 0, 0); }) ==
        ErrorCode::InvalidParameter);
  CHECK(code_of([&] { scores_at_symmetry(skew_normal(0, 1, 0.5)); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scores_at_symmetry examples") {
  const auto s = scores_at_symmetry(skew_normal());
  const double k = std::sqrt(2.0 / std::numbers::pi);
  for (double x : {-2.0, -0.5, 1.0, 3.0}) {
    CHECK(s.mu(x) == doctest::Approx(x));
    CHECK(s.sigma(x) == doctest::Approx(x * x - 1.0));
    CHECK(s.delta(x) == doctest::Approx(k * x));
  }

  const SkewSymmetricModel st(make_builtin("normal"), SkewingCdf::normal(), SkewingArgument::skew_t(5));
  const auto t = scores_at_symmetry(st);
  for (double x : {-2.0, 0.5, 1.0, 3.0}) {
    CHECK(t.delta(x) == doctest::Approx(2 * oracle::normal_pdf(0) * x * std::sqrt(6.0 / (5.0 + x * x))));
  }
  CHECK(t.delta(3.0) / 3.0 != doctest::Approx(t.delta(1.0)));
  CHECK(score_crosscheck(st) <= 1e-5);
  CHECK(score_crosscheck(skew_normal(0.5, 2.0, 0.0)) <= 1e-5);
}

TEST_CASE("scores have zero mean") {
  const std::vector<SkewSymmetricModel> models = {
      skew_normal(),
      SkewSymmetricModel(make_builtin("logistic"), SkewingCdf::logistic(), SkewingArgument::skew_t(3), 0.5, 2.0),
      SkewSymmetricModel(make_builtin("normal"), SkewingCdf::normal(), SkewingArgument::scale_score(make_builtin("normal"))),
      SkewSymmetricModel(make_builtin("student"), SkewingCdf::student(6),
                         SkewingArgument::location_score(make_builtin("student")))};
  for (const auto& m : models) {
    const auto s = scores_at_symmetry(m);
    for (const auto& f : {s.mu, s.sigma, s.delta}) {
      const double e = oracle::simpson_split([&](double x) { return f(x) * skew_density(m, x); },
                                             m.mu() - 200 * m.sigma(), m.mu() + 200 * m.sigma(), {m.mu()}, 200000);
      CHECK(std::abs(e) <= 1e-7);
    }
  }
}

TEST_CASE("fisher information examples") {
  const auto sn = fisher_info_at_symmetry(skew_normal());
  CHECK(sn.rank_at_tol == 2);
  CHECK(sn.min_rel_eigenvalue <= 1e-8);
  // Closed form for the skew-normal at (0, 1, 0).
  const double k = std::sqrt(2.0 / std::numbers::pi);
  const numerics::Matrix3 expected = {{{1.0, 0.0, k}, {0.0, 2.0, 0.0}, {k, 0.0, 2.0 / std::numbers::pi}}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(sn.matrix[i][j] == doctest::Approx(expected[i][j]).epsilon(1e-9).scale(1.0));
  REQUIRE(sn.collinearity.has_value());
  CHECK(sn.collinearity->c1 == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(std::abs(sn.collinearity->c2) <= 1e-9);

  const SkewSymmetricModel st(make_builtin("normal"), SkewingCdf::student(6), SkewingArgument::skew_t(5));
  const auto t = fisher_info_at_symmetry(st);
  CHECK(t.rank_at_tol == 3);
  CHECK_FALSE(t.collinearity.has_value());

  const auto lap = make_builtin("laplace");
  for (const auto& F : cdfs()) {
    const SkewSymmetricModel m(lap, F, SkewingArgument::location_score(lap));
    CHECK(fisher_info_at_symmetry(m).rank_at_tol == 2);
  }
}

TEST_CASE("fisher eigenvalues agree with a Jacobi oracle") {
  const SkewSymmetricModel m(make_builtin("logistic"), SkewingCdf::logistic(), SkewingArgument::skew_t(4), 0, 1.5);
  const auto r = fisher_info_at_symmetry(m);
  const auto ev = oracle::jacobi_eigenvalues(r.matrix);
  for (int i = 0; i < 3; ++i) CHECK(r.eigenvalues[i] == doctest::Approx(ev[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("construct_singular_scale_pair examples") {
  const auto n = make_builtin("normal");
  const auto same = construct_singular_scale_pair(n, 1, 0);
  for (double x : {-1.0, 0.3, 2.0}) CHECK(same.pdf(x) == doctest::Approx(n.pdf(x)).epsilon(1e-10));

  const auto q = construct_singular_scale_pair(n, 1, 2);
  CHECK(q.symmetric());
  for (double x : {-2.0, 0.7, 1.5}) {
    CHECK(q.pdf(x) == doctest::Approx(x * x * oracle::normal_pdf(x)).epsilon(1e-10));
    CHECK(scale_score(q, x).psi == doctest::Approx(3.0 - x * x).epsilon(1e-10));
  }

  const SkewSymmetricModel pair(q, SkewingCdf::normal(), SkewingArgument::scale_score(n));
  const auto rep = singularity_report(pair);
  CHECK(rep.singular);
  REQUIRE(rep.detail.collinearity.has_value());
  CHECK(rep.detail.collinearity->c1 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.detail.collinearity->c2 == doctest::Approx(2.0).epsilon(1e-6));

  const auto q21 = construct_singular_scale_pair(n, 2, 1);
  CHECK(singularity_report(SkewSymmetricModel(q21, SkewingCdf::normal(), SkewingArgument::scale_score(n))).singular);
}

TEST_CASE("scale-score singularity examples") {
  const auto n = make_builtin("normal");
  CHECK(singularity_report(SkewSymmetricModel(n, SkewingCdf::normal(), SkewingArgument::scale_score(n))).singular);
  CHECK_FALSE(singularity_report(
                  SkewSymmetricModel(make_builtin("logistic"), SkewingCdf::normal(), SkewingArgument::scale_score(n)))
                  .singular);
}

TEST_CASE("construct_singular_scale_pair errors") {
  const auto n = make_builtin("normal");
  CHECK(code_of([&] { construct_singular_scale_pair(n, 1, 1); }) == ErrorCode::ParityViolation);
  CHECK(code_of([&] { construct_singular_scale_pair(n, 1, 0.5); }) == ErrorCode::ParityViolation);
  CHECK(code_of([&] { construct_singular_scale_pair(n, 2, -3); }) == ErrorCode::ParityViolation);
  CHECK(code_of([&] { construct_singular_scale_pair(n, -1, 2); }) == ErrorCode::NotIntegrable);
  // |x|^6 against t5 tails |x|^-6.
  CHECK(code_of([] { construct_singular_scale_pair(make_builtin("student"), 1, 6); }) == ErrorCode::NotIntegrable);
  CHECK(code_of([] { construct_singular_scale_pair(make_builtin("gumbel"), 1, 2); }) == ErrorCode::NotSymmetric);
}

TEST_CASE("property: delta = 0 reduces to the base") {
  gen::for_all(40, 51, [](gen::Gen& g, int) {
    const auto base = make_builtin(g.pick(std::vector<std::string>{"normal", "logistic", "laplace", "student"}));
    const double mu = g.uniform(-2, 2);
    const double sigma = g.uniform(0.3, 3);
    const SkewSymmetricModel m(base, cdfs()[static_cast<std::size_t>(g.integer(0, 2))],
                               g.coin() ? SkewingArgument::skew_t(g.uniform(1, 10)) : SkewingArgument::scale_score(base),
                               mu, sigma, 0.0);
    for (int k = 0; k < 5; ++k) {
      const double x = g.uniform(mu - 4 * sigma, mu + 4 * sigma);
      const double ref = base.pdf((x - mu) / sigma) / sigma;
      CHECK(std::abs(skew_density(m, x) - ref) <= 1e-12 * std::max(1.0, ref));
    }
  });
}

TEST_CASE("property: odd arguments keep the density normalized") {
  for (const auto& name : {"normal", "logistic", "laplace"}) {
    const auto base = make_builtin(name);
    const std::vector<SkewingArgument> args = {SkewingArgument::identity(), SkewingArgument::location_score(base),
                                               SkewingArgument::skew_t(5)};
    for (const auto& arg : args) {
      for (const auto& F : cdfs()) {
        for (double delta : {-2.0, -0.5, 0.5, 2.0}) {
          CAPTURE(name);
          CAPTURE(arg.label());
          CAPTURE(delta);
          CHECK(std::abs(model_mass(SkewSymmetricModel(base, F, arg, 0, 1, delta)) - 1.0) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("property: even arguments are normalized numerically") {
  const auto n = make_builtin("normal");
  for (double delta : {-2.0, 0.5, 2.0}) {
    const SkewSymmetricModel m(make_builtin("logistic"), SkewingCdf::normal(), SkewingArgument::scale_score(n), 0, 1, delta);
    CHECK(m.normalizer() != doctest::Approx(1.0));
    CHECK(std::abs(model_mass(m) - 1.0) <= 1e-8);
  }
}

TEST_CASE("property: fisher matrix block structure") {
  gen::for_all(16, 52, [](gen::Gen& g, int) {
    const auto base = make_builtin(g.pick(std::vector<std::string>{"normal", "logistic", "student"}));
    const bool odd = g.coin();
    const auto arg = odd ? SkewingArgument::skew_t(g.uniform(2, 8)) : SkewingArgument::scale_score(base);
    const SkewSymmetricModel m(base, cdfs()[static_cast<std::size_t>(g.integer(0, 2))], arg, g.uniform(-1, 1),
                               g.uniform(0.5, 2));
    const auto r = fisher_info_at_symmetry(m);
    const double lmax = r.eigenvalues[2];
    CHECK(std::abs(r.matrix[0][1]) <= 1e-8 * lmax);
    if (odd) {
      CHECK(std::abs(r.matrix[1][2]) <= 1e-8 * lmax);
    } else {
      CHECK(std::abs(r.matrix[0][2]) <= 1e-8 * lmax);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(r.matrix[i][j] == r.matrix[j][i]);
    CHECK(r.eigenvalues[0] >= -1e-9 * lmax);
  });
}

TEST_CASE("property: skew-normal scores are exactly collinear") {
  for (double sigma : {0.5, 1.0, 2.5}) {
    const auto s = scores_at_symmetry(skew_normal(0.7, sigma, 0));
    for (double x : {-3.0, -1.0, 0.2, 2.0, 5.0}) {
      if (x == 0.7) continue;
      CHECK(std::abs(s.delta(x) / s.mu(x) - std::sqrt(2.0 / std::numbers::pi) * sigma) <= 1e-9);
    }
  }
}

TEST_CASE("property: singularity does not depend on the skewing cdf") {
  for (const auto& name : {"normal", "logistic", "laplace", "student"}) {
    const auto base = make_builtin(name);
    for (const auto* argkind : {"location_score", "skew_t"}) {
      std::vector<bool> verdicts;
      for (const auto& F : cdfs()) {
        const auto arg = std::string(argkind) == "skew_t" ? SkewingArgument::skew_t(5) : SkewingArgument::location_score(base);
        verdicts.push_back(singularity_report(SkewSymmetricModel(base, F, arg)).singular);
      }
      CAPTURE(name);
      CAPTURE(argkind);
      CHECK(verdicts[0] == verdicts[1]);
      CHECK(verdicts[1] == verdicts[2]);
      if (std::string(argkind) == "location_score") CHECK(verdicts[0]);
    }
  }
}

TEST_CASE("property: the scale pair satisfies the psi identity") {
  gen::for_all(12, 53, [](gen::Gen& g, int) {
    const auto p = make_builtin(g.pick(std::vector<std::string>{"normal", "logistic", "laplace"}));
    const double c1 = g.uniform(0.5, 3);
    const int sum = 2 * g.integer(0, 2) + 1;
    const double c2 = sum - c1;
    const auto q = construct_singular_scale_pair(p, c1, c2);
    for (double x : central_grid(q, 0.99, 41)) {
      if (x == 0.0 || p.is_nondiff_point(x)) continue;
      CHECK(std::abs(scale_score(q, x).psi - (c1 * scale_score(p, x).psi + c2)) <= 1e-7);
    }
  });
}

TEST_CASE("property: serial and parallel fisher matrices agree") {
  gen::for_all(6, 54, [](gen::Gen& g, int) {
    const auto base = make_builtin(g.pick(std::vector<std::string>{"normal", "logistic", "laplace"}));
    const SkewSymmetricModel m(base, cdfs()[static_cast<std::size_t>(g.integer(0, 2))],
                               SkewingArgument::skew_t(g.uniform(1, 9)), g.uniform(-1, 1), g.uniform(0.5, 2));
    const auto a = fisher_matrix(m);
    const auto b = fisher_matrix_serial(m);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(a[i][j] == b[i][j]);
  });
}

}  // TEST_SUITE
