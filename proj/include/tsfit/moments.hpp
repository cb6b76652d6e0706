#pragma once

#include <vector>

#include "tsfit/lagged_covariance.hpp"
#include "tsfit/overlap.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

struct Correlogram {
  std::vector<Matrix> rho;  // lags 0..h_max

  int h_max() const { return static_cast<int>(rho.size()) - 1; }
  Eigen::Index d() const { return rho.front().rows(); }
};

struct PartialCorrelogram {
  std::vector<Matrix> kappa;  // orders 1..p_max

  int p_max() const { return static_cast<int>(kappa.size()); }
  const Matrix& at(int p) const { return kappa.at(static_cast<std::size_t>(p - 1)); }
};

// (1/N) sum_k X_k, as an H=0 window kernel over the overlap engine.
Vector mean(const std::vector<Partition>& parts, const EngineOptions& opt = {});
Vector mean(const RegularSeries& series, const OverlapLayout& layout,
            const EngineOptions& opt = {});

// Subtracts mu from every row.
RegularSeries center(const RegularSeries& series, const Vector& mu);

// Per-lag estimator gamma_hat(h) = 1/(N-h-1) sum_{k=1}^{N-h} X_k X_{k+h}^T,
// one forward-window map-reduce pass per lag. Series must be centered.
LaggedCovariance autocovariance_per_lag(const std::vector<Partition>& parts, int h_max,
                                        const EngineOptions& opt = {});
LaggedCovariance autocovariance_per_lag(const RegularSeries& series, const OverlapLayout& layout,
                                        int h_max, const EngineOptions& opt = {});

// Joint estimator: one interior-centers pass whose kernel emits the whole
// lag stack; normalization 1/(N-(2H+1)). gamma(h) averages the +h and -h
// one-sided sums so gamma(-h) = gamma(h)^T holds exactly.
LaggedCovariance autocovariance_joint(const std::vector<Partition>& parts, int h_max,
                                      const EngineOptions& opt = {});
LaggedCovariance autocovariance_joint(const RegularSeries& series, const OverlapLayout& layout,
                                      int h_max, const EngineOptions& opt = {});

// rho(h) = diag(gamma(0))^{-1/2} gamma(h) diag(gamma(0))^{-1/2}.
Correlogram autocorrelation(const LaggedCovariance& cov);

// kappa(p) = U_p from the order-p block-Toeplitz prediction system, for each
// p <= p_max. `ridge` adds ridge*I to the Toeplitz matrix for near-singular
// inputs (off by default).
PartialCorrelogram pacf(const LaggedCovariance& cov, int p_max, double ridge = 0.0);

// Asymptotic 95% significance band 1.96/sqrt(n).
double significance_band(std::int64_t n);

}  // namespace tsfit
