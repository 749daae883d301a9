#include <doctest.h>

#include <cmath>
#include <numbers>

#include "scorekit/error.hpp"
#include "scorekit/numerics.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace scorekit;
using namespace scorekit::numerics;

TEST_SUITE("numerics") {

TEST_CASE("standard normal integrates to one over the real line") {
  CHECK(std::abs(integrate([](double x) { return oracle::normal_pdf(x); }, -kInf, kInf) - 1.0) <= 1e-10);
}

TEST_CASE("gamma integral on a half line") {
  const double v = integrate([](double x) { return x * std::exp(-x); }, 0.0, kInf);
  CHECK(std::abs(v - 1.0) <= 1e-10);
  const double w = integrate([](double x) { return std::exp(x); }, -kInf, 0.0);
  CHECK(std::abs(w - 1.0) <= 1e-10);
}

TEST_CASE("normal tail first moment equals the density") {
  const double t = 1.0;
  const double v = integrate([](double x) { return x * oracle::normal_pdf(x); }, t, kInf);
  CHECK(std::abs(v - oracle::normal_pdf(1.0)) <= 1e-8);
  CHECK(std::abs(v - 0.24197072451914337) <= 1e-8);
}

TEST_CASE("finite interval against a fine Simpson oracle") {
  const auto f = [](double x) { return std::sin(3 * x) * std::exp(-x * x / 4) + x * x; };
  const double expect = oracle::simpson(f, -2.0, 3.5, 200000);
  CHECK(std::abs(integrate(f, -2.0, 3.5) - expect) <= 1e-9);
}

TEST_CASE("breakpoints handle a kink") {
  const auto f = [](double x) { return std::exp(-std::abs(x - 0.3)); };
  const double exact = 2.0 - std::exp(-1.3) - std::exp(-0.7);
  const double pts[] = {0.3};
  CHECK(std::abs(integrate(f, -1.0, 1.0, pts) - exact) <= 1e-10);
}

TEST_CASE("quadrature errors") {
  SUBCASE("non-finite integrand") {
    try {
      integrate([](double) { return std::nan(""); }, 0.0, 1.0);
      FAIL("expected NonFinite");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonFinite);
    }
  }
  SUBCASE("budget exhausted") {
    QuadratureSpec spec;
    spec.max_subdivisions = 3;
    spec.abs_tol = 1e-15;
    spec.rel_tol = 1e-15;
    try {
      integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, spec);
      FAIL("expected NonConvergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonConvergence);
    }
  }
  SUBCASE("invalid spec") {
    QuadratureSpec spec;
    spec.abs_tol = 0.0;
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, 1.0, spec), Error);
  }
}

TEST_CASE("find_root examples") {
  const auto f = [](double x) { return x - 2.0; };
  CHECK(std::abs(find_root(f, Bracket::around(f, 0.0, 5.0), 1e-12) - 2.0) <= 1e-12);

  const double xs[] = {1.0, 2.0, 3.0};
  const auto g = [&](double mu) {
    double s = 0.0;
    for (double x : xs) s += -(x - mu);
    return s;
  };
  CHECK(std::abs(find_root(g, Bracket::around(g, 0.0, 10.0), 1e-12) - 2.0) <= 1e-12);

  const auto h = [](double x) { return std::tanh(x) - 0.5; };
  CHECK(std::abs(find_root(h, Bracket::around(h, 0.0, 2.0), 1e-13) - std::atanh(0.5)) <= 1e-12);
  CHECK(std::abs(std::atanh(0.5) - 0.5493) < 1e-4);
}

TEST_CASE("find_root rejects a bracket without a sign change") {
  const auto f = [](double x) { return x * x + 1.0; };
  try {
    find_root(f, Bracket::around(f, -1.0, 1.0), 1e-10);
    FAIL("expected InvalidBracket");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBracket);
  }
  CHECK_FALSE(Bracket{1.0, 0.0, -1.0, 1.0}.valid());
  CHECK(Bracket{0.0, 1.0, 0.0, 1.0}.valid());
}

TEST_CASE("find_root handles a step function") {
  const auto sgn = [](double x) { return x > 0.7 ? 1.0 : -1.0; };
  const double r = find_root(sgn, Bracket::around(sgn, -3.0, 4.0), 1e-12);
  CHECK(std::abs(r - 0.7) <= 1e-11);
}

TEST_CASE("central_diff examples") {
  CHECK(std::abs(central_diff([](double x) { return std::exp(x); }, 0.0, 1) - 1.0) <= 1e-9);
  CHECK(std::abs(central_diff([](double x) { return -x * x / 2; }, 3.0, 1) + 3.0) <= 1e-8);
  CHECK(std::abs(central_diff([](double x) { return x * x * x; }, 2.0, 2) - 12.0) <= 1e-5);
  CHECK_THROWS_AS(central_diff([](double x) { return x; }, 0.0, 3), Error);
  CHECK_THROWS_AS(central_diff([](double x) { return 1.0 / x; }, 0.0, 1, 1e-300), Error);
  CHECK(default_step(10.0, 1) == doctest::Approx(10.0 * std::cbrt(2.220446049250313e-16)));
}

TEST_CASE("eig_sym3 examples") {
  const Matrix3 id{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  auto e = eig_sym3(id);
  for (double v : e.values) CHECK(std::abs(v - 1.0) <= 1e-14);

  const Matrix3 d{{{3, 0, 0}, {0, 1, 0}, {0, 0, 2}}};
  e = eig_sym3(d);
  CHECK(e.values[0] == doctest::Approx(1.0));
  CHECK(e.values[1] == doctest::Approx(2.0));
  CHECK(e.values[2] == doctest::Approx(3.0));

  // v v^T + w w^T with orthonormal v, w.
  const double s = 1.0 / std::sqrt(2.0);
  const double v[3] = {s, s, 0};
  const double w[3] = {0, 0, 1};
  Matrix3 m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = v[i] * v[j] + w[i] * w[j];
  e = eig_sym3(m);
  CHECK(std::abs(e.values[0]) <= 1e-14);
  CHECK(std::abs(e.values[1] - 1.0) <= 1e-14);
  CHECK(std::abs(e.values[2] - 1.0) <= 1e-14);
}

TEST_CASE("eig_sym3 rejects asymmetric input") {
  const Matrix3 m{{{1, 2, 0}, {2.1, 1, 0}, {0, 0, 1}}};
  try {
    eig_sym3(m);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSymmetric);
  }
}

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
  CompensatedSum a, b;
  a.add(0.1);
  b.add(0.2);
  a.merge(b);
  CHECK(a.value() == doctest::Approx(0.3));
}

TEST_CASE("property: integrate is linear on polynomial times gaussian") {
  gen::for_all(40, 101, [](gen::Gen& g, int i) {
    const auto p = g.polynomial(g.integer(0, 4), 3.0);
    const auto q = g.polynomial(g.integer(0, 4), 3.0);
    const double a = g.uniform(-2, 2);
    const double b = g.uniform(-2, 2);
    const auto fp = [&](double x) { return gen::eval_poly(p, x) * oracle::normal_pdf(x); };
    const auto fq = [&](double x) { return gen::eval_poly(q, x) * oracle::normal_pdf(x); };
    const double ip = integrate(fp, -kInf, kInf);
    const double iq = integrate(fq, -kInf, kInf);
    const double ic = integrate([&](double x) { return a * fp(x) + b * fq(x); }, -kInf, kInf);
    const double tol = 4e-10 + 2e-8 * (std::abs(a * ip) + std::abs(b * iq) + std::abs(ic));
    CAPTURE(i);
    CHECK(std::abs(ic - a * ip - b * iq) <= tol);
    // Gaussian moment oracle: E[x^k] = (k-1)!! for even k.
    double exact = 0.0;
    double moment = 1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k % 2 == 0) {
        exact += p[k] * moment;
        moment *= static_cast<double>(k + 1);
      }
    }
    CHECK(std::abs(ip - exact) <= 1e-9 + 1e-8 * std::abs(exact));
  });
}

TEST_CASE("property: find_root stays inside the bracket") {
  gen::for_all(200, 202, [](gen::Gen& g, int i) {
    const double r = g.uniform(-10, 10);
    const double k = g.uniform(0.1, 5);
    const auto f = [&](double x) { return std::tanh(k * (x - r)) + 0.1 * (x - r); };
    const double lo = r - g.uniform(0.0, 20);
    const double hi = r + g.uniform(1e-3, 20);
    const double x = find_root(f, Bracket::around(f, lo, hi), 1e-12);
    CAPTURE(i);
    CHECK(x >= lo);
    CHECK(x <= hi);
    CHECK(std::abs(x - r) <= 1e-9);
  });
}

TEST_CASE("property: eigenvalues sum to the trace and match Jacobi") {
  gen::for_all(300, 303, [](gen::Gen& g, int i) {
    const auto m = g.symmetric3(g.uniform(0.01, 100));
    const auto e = eig_sym3(m);
    const double trace = m[0][0] + m[1][1] + m[2][2];
    double scale = 0.0;
    for (const auto& r : m)
      for (double v : r) scale = std::max(scale, std::abs(v));
    CAPTURE(i);
    CHECK(std::abs(e.values[0] + e.values[1] + e.values[2] - trace) <= 1e-10 * scale * 3);
    CHECK(e.values[0] <= e.values[1]);
    CHECK(e.values[1] <= e.values[2]);
    const auto j = oracle::jacobi_eigenvalues(m);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(e.values[k] - j[k]) <= 1e-10 * scale);
    // Reconstruction Q diag Q^T.
    double err = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int k = 0; k < 3; ++k) v += e.vectors[r][k] * e.values[k] * e.vectors[c][k];
        err = std::max(err, std::abs(v - m[r][c]));
      }
    }
    CHECK(err <= 1e-10 * scale);
  });
}

TEST_CASE("property: central_diff is exact enough on cubics") {
  gen::for_all(300, 404, [](gen::Gen& g, int i) {
    const auto c = g.polynomial(3, 5.0);
    const double x = g.uniform(-5, 5);
    const auto f = [&](double t) { return gen::eval_poly(c, t); };
    const double d1 = gen::eval_poly_prime(c, x);
    const double d2 = 2 * c[2] + 6 * c[3] * x;
    double mag = 0.0;
    for (double v : c) mag += std::abs(v) * 125.0;
    CAPTURE(i);
    CHECK(std::abs(central_diff(f, x, 1) - d1) <= 1e-6 * std::max(std::abs(d1), 1.0) + 1e-9 * mag);
    CHECK(std::abs(central_diff(f, x, 2) - d2) <= 1e-6 * std::max(std::abs(d2), 1.0) + 1e-7 * mag);
  });
}

}  // TEST_SUITE
