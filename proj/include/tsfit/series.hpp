#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace tsfit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Row-major so an observation X_t is one contiguous row; window kernels and
// partition copies work on contiguous row spans.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A regularly indexed block of observations. Row t of `values` is X_{start_index + t}.
struct RegularSeries {
  std::int64_t start_index = 0;
  RowMatrix values;

  std::int64_t n() const { return values.rows(); }
  Eigen::Index d() const { return values.cols(); }

  // Throws DomainError unless n >= 1, d >= 1 and every entry is finite.
  void validate() const;
};

// Applies the forward difference (X_{t+1} - X_t) `order` times.
// Output length n - order; start_index preserved.
RegularSeries difference(const RegularSeries& series, int order);

// Inverse of difference: repeated cumulative sum seeded with `initial` at
// each level, so difference(integrate(s, v, 1), 1) == s exactly.
RegularSeries integrate(const RegularSeries& series, const Vector& initial, int order);

}  // namespace tsfit
