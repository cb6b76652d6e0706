#pragma once

#include <string>
#include <vector>

#include "tsfit/lagged_covariance.hpp"
#include "tsfit/model.hpp"

namespace tsfit {

// A fitted model plus fit metadata. Causality/invertibility problems are
// reported as warnings, never silently repaired.
struct FittedModel {
  ArmaModel model;
  std::string method;
  std::vector<std::string> warnings;
  int m_depth = 0;      // innovation recursion depth, when one was used
  bool converged = true;

  bool has_warning(const std::string& w) const;
};

// Innovation recursion state: Theta_{m,j} for 1 <= j <= m <= m_max and the
// prediction covariances Sigma_0..Sigma_{m_max}.
struct InnovationState {
  Eigen::Index d = 1;
  std::vector<std::vector<Matrix>> theta;  // theta[m-1][j-1] = Theta_{m,j}
  std::vector<Matrix> sigma;               // Sigma_0..Sigma_{m_max}

  int m_max() const { return static_cast<int>(theta.size()); }
  const Matrix& theta_at(int m, int j) const {
    return theta.at(static_cast<std::size_t>(m - 1)).at(static_cast<std::size_t>(j - 1));
  }
};

// Solves the Yule-Walker block-Toeplitz system for A_1..A_p and estimates
// Sigma_eps = gamma(0) - sum_k A_k gamma(k), symmetrized.
FittedModel fit_ar_yule_walker(const LaggedCovariance& cov, int p);

// Univariate O(p^2) Levinson recursion; identical solution to the dense
// Yule-Walker solve. Also returns the reflection-coefficient PACF sequence.
struct DurbinLevinsonResult {
  FittedModel fit;
  std::vector<double> reflection;  // kappa(1)..kappa(p)
};
DurbinLevinsonResult fit_ar_durbin_levinson(const LaggedCovariance& cov, int p);

// Multivariate innovations recursion starting from Sigma_0 = gamma(0).
InnovationState innovations(const LaggedCovariance& cov, int m_max);

// MA(q) via the innovations estimates: B_j = Theta_{m,j}, Sigma_eps = Sigma_m.
// m = 0 picks the default q + 20.
FittedModel fit_ma(const LaggedCovariance& cov, int q, int m = 0);

// ARMA(p, q) hybrid: Psi_{m,j} := Theta_{m,j}; solves the Psi block-Toeplitz
// system for A_1..A_p, back-substitutes B_1..B_q, Sigma_eps = Sigma_m.
// m = 0 picks the default p + q + 20.
FittedModel fit_arma(const LaggedCovariance& cov, int p, int q, int m = 0);

}  // namespace tsfit
