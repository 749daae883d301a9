#pragma once

// Seeded generators for the property tests. Each property draws its inputs
// from a Gen; a failing case is reported with its index so it can be
// replayed with the same seed.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, static_cast<int>(v.size()) - 1))];
  }

  std::vector<double> reals(std::size_t n, double a, double b) {
    std::vector<double> out(n);
    for (auto& x : out) x = uniform(a, b);
    return out;
  }


  /// Random symmetric matrix with entries in [-s, s].
  std::array<std::array<double, 3>, 3> symmetric3(double s) {
    std::array<std::array<double, 3>, 3> m{};
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) m[i][j] = m[j][i] = uniform(-s, s);
    return m;
  }

  /// Polynomial coefficients c0..c_degree in [-s, s].
  std::vector<double> polynomial(int degree, double s) { return reals(static_cast<std::size_t>(degree + 1), -s, s); }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double eval_poly(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

inline double eval_poly_prime(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) {
    v = v * x + static_cast<double>(k) * c[k];
  }
  return v;
}

/// Runs prop(gen, case_index) for `cases` cases from one seed.
template <class Prop>
void for_all(int cases, std::uint64_t seed, Prop&& prop) {
  Gen g(seed);
  for (int i = 0; i < cases; ++i) prop(g, i);
}

}  // namespace gen
