#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsfit/series.hpp"

namespace tsfit {

enum class CovNormalization { per_lag_unbiased, joint_biased, exact_model };

std::string to_string(CovNormalization tag);

// The stack gamma(-H..H) of d x d autocovariance matrices, the sufficient
// statistic for every frequentist fit in this library. Only lags h >= 0 are
// stored; gamma(-h) is served as gamma(h)^T, which makes the symmetry
// gamma(-h) = gamma(h)^T exact by construction.
class LaggedCovariance {
 public:
  LaggedCovariance(std::vector<Matrix> gamma_nonneg, std::int64_t n_effective,
                   CovNormalization tag);

  int h_max() const { return static_cast<int>(gamma_.size()) - 1; }
  Eigen::Index d() const { return gamma_.front().rows(); }
  std::int64_t n_effective() const { return n_effective_; }
  CovNormalization normalization() const { return tag_; }

  // gamma(h) for any h in [-h_max, h_max].
  Matrix gamma(int h) const;
  const Matrix& gamma_nonneg(int h) const { return gamma_.at(static_cast<std::size_t>(h)); }

 private:
  std::vector<Matrix> gamma_;  // index h = 0..h_max
  std::int64_t n_effective_;
  CovNormalization tag_;
};

}  // namespace tsfit
