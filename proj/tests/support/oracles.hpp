#pragma once

// Reference computations that share no code with the library: fixed-grid
// Simpson rules, plain bisection, closed-form densities and a Jacobi
// eigen-solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2 == 1) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Simpson on [a, b] split at the given interior kinks.
inline double simpson_split(const std::function<double(double)>& f, double a, double b,
                            std::vector<double> kinks, int n_per_piece = 20000) {
  kinks.erase(std::remove_if(kinks.begin(), kinks.end(), [&](double k) { return k <= a || k >= b; }),
              kinks.end());
  std::sort(kinks.begin(), kinks.end());
  double lo = a;
  double total = 0.0;
  for (double k : kinks) {
    total += simpson(f, lo, k, n_per_piece);
    lo = k;
  }
  return total + simpson(f, lo, b, n_per_piece);
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double normal_pdf(double x, double mu = 0.0, double sigma = 1.0) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double logistic_pdf(double x, double s = 1.0) {
  const double e = std::exp(-std::abs(x) / s);
  return e / (s * (1.0 + e) * (1.0 + e));
}

inline double laplace_pdf(double x, double b = 1.0) { return std::exp(-std::abs(x) / b) / (2.0 * b); }

inline double exponential_pdf(double x, double lambda = 1.0) {
  return x > 0.0 ? lambda * std::exp(-lambda * x) : 0.0;
}

inline double gamma_pdf(double x, double k, double theta = 1.0) {
  if (x <= 0.0) return 0.0;
  return std::exp((k - 1.0) * std::log(x) - x / theta - std::lgamma(k) - k * std::log(theta));
}

inline double gumbel_pdf(double x, double beta = 1.0) {
  const double z = x / beta;
  return std::exp(-(z + std::exp(-z))) / beta;
}

inline double student_pdf(double x, double nu) {
  return std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                  0.5 * std::log(nu * std::numbers::pi) -
                  0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

using Mat3 = std::array<std::array<double, 3>, 3>;

/// Cyclic Jacobi rotations; eigenvalues ascending.
inline std::array<double, 3> jacobi_eigenvalues(Mat3 a) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-300) break;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, 3> ev{a[0][0], a[1][1], a[2][2]};
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double mean(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += v;
  return static_cast<double>(s / x.size());
}

inline double rms(const std::vector<double>& x) {
  long double s = 0;
  for (double v : x) s += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(s / x.size()));
}

inline double median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const auto n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

}  // namespace oracle
