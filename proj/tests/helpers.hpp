#pragma once

// Shared test utilities: independent oracles (Shewchuk expansion sums,
// Durand-Kerner polynomial roots), RNG helpers and matrix comparisons.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tsfit/series.hpp"

namespace testutil {

// Error-free expansion sum (Shewchuk grow-expansion): the oracle for exact
// accumulation, independent of the fixed-point implementation under test.
class ExpansionSum {
 public:
  void add(double x) {
    std::vector<double> fresh;
    fresh.reserve(terms_.size() + 1);
    for (double t : terms_) {
      const double s = t + x;
      const double bv = s - t;
      const double err = (t - (s - bv)) + (x - bv);
      if (err != 0.0) fresh.push_back(err);
      x = s;
    }
    if (x != 0.0) fresh.push_back(x);
    terms_ = std::move(fresh);
  }

  double value() const {
    // Components are nonoverlapping and sorted by magnitude; summing from
    // smallest up gives a faithfully rounded result.
    double s = 0.0;
    for (double t : terms_) s += t;
    return s;
  }

 private:
  std::vector<double> terms_;  // increasing magnitude
};

// Durand-Kerner roots of a monic polynomial z^n + c[0] z^{n-1} + ... + c[n-1].
inline std::vector<std::complex<double>> monic_roots(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  std::vector<std::complex<double>> roots(n);
  std::complex<double> seed(0.4, 0.9);
  std::complex<double> power(1.0, 0.0);
  for (int i = 0; i < n; ++i) {
    power *= seed;
    roots[i] = power;
  }
  auto eval = [&](std::complex<double> z) {
    std::complex<double> v(1.0, 0.0);
    for (int i = 0; i < n; ++i) v = v * z + c[static_cast<std::size_t>(i)];
    return v;
  };
  for (int iter = 0; iter < 500; ++iter) {
    double shift = 0.0;
    for (int i = 0; i < n; ++i) {
      std::complex<double> denom(1.0, 0.0);
      for (int j = 0; j < n; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      const std::complex<double> delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      shift = std::max(shift, std::abs(delta));
    }
    if (shift < 1e-13) break;
  }
  return roots;
}

// Largest root modulus of z^p - a1 z^{p-1} - ... - ap, the stability oracle
// for a univariate AR(p).
inline double ar_root_radius(const std::vector<double>& a) {
  std::vector<double> c;
  c.reserve(a.size());
  for (double v : a) c.push_back(-v);
  double radius = 0.0;
  for (const auto& r : monic_roots(c)) radius = std::max(radius, std::abs(r));
  return radius;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline tsfit::Matrix random_matrix(std::mt19937_64& g, Eigen::Index d, double scale) {
  tsfit::Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = uniform(g, -scale, scale);
  return m;
}

inline tsfit::Matrix random_spd(std::mt19937_64& g, Eigen::Index d) {
  const tsfit::Matrix m = random_matrix(g, d, 1.0);
  return m * m.transpose() + 0.3 * tsfit::Matrix::Identity(d, d);
}

inline double max_abs_diff(const tsfit::Matrix& a, const tsfit::Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testutil
