#include "tsfit/lagged_covariance.hpp"

#include <cstdlib>

#include "tsfit/errors.hpp"

namespace tsfit {

std::string to_string(CovNormalization tag) {
  switch (tag) {
    case CovNormalization::per_lag_unbiased:
      return "per-lag-unbiased";
    case CovNormalization::joint_biased:
      return "joint-biased";
    case CovNormalization::exact_model:
      return "exact-model";
  }
  return "unknown";
}

LaggedCovariance::LaggedCovariance(std::vector<Matrix> gamma_nonneg, std::int64_t n_effective,
                                   CovNormalization tag)
    : gamma_(std::move(gamma_nonneg)), n_effective_(n_effective), tag_(tag) {
  if (gamma_.empty()) throw DomainError("LaggedCovariance: need at least lag 0");
  const Eigen::Index dim = gamma_.front().rows();
  for (const auto& g : gamma_) {
    if (g.rows() != dim || g.cols() != dim)
      throw DomainError("LaggedCovariance: inconsistent block shape");
    if (!g.allFinite()) throw DomainError("LaggedCovariance: non-finite block");
  }
  if ((gamma_.front() - gamma_.front().transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw DomainError("LaggedCovariance: gamma(0) not symmetric");
}

Matrix LaggedCovariance::gamma(int h) const {
  const int a = std::abs(h);
  if (a > h_max()) throw DomainError("LaggedCovariance: lag out of range");
  if (h >= 0) return gamma_[static_cast<std::size_t>(a)];
  return gamma_[static_cast<std::size_t>(a)].transpose();
}

}  // namespace tsfit
