#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "tsfit/fit_freq.hpp"
#include "tsfit/overlap.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

struct StepRule {
  enum class Kind { fixed, eigen_two_over_m_plus_L, backtracking };
  Kind kind = Kind::eigen_two_over_m_plus_L;
  double eta = 1e-3;    // fixed
  double c = 1e-4;      // backtracking: Armijo constant, in (0, 1)
  double shrink = 0.5;  // backtracking: step shrink factor, in (0, 1)

  static StepRule fixed(double eta);
  static StepRule eigen();
  static StepRule backtracking(double c = 1e-4, double shrink = 0.5);
};

struct MleOptions {
  int max_iters = 500;
  double grad_tol = 1e-6;  // stop when max-abs gradient entry drops below
  StepRule step;
  bool sgd = false;          // one sampled term per step, eta_t = step0/(1+t)
  double sgd_step0 = 0.5;
  std::uint64_t seed = 0;    // sgd sampling stream
  enum class Init { zeros, yule_walker_warm_start } init = Init::zeros;
  int rounds = 3;  // alternations of (fit A, refresh Sigma) when Sigma is unknown

  void validate() const;
};

// Gaussian conditional log-likelihood
//   sum_{t=p+1}^{N} log f(X_t - A_1 X_{t-1} - ... - A_p X_{t-p}, Sigma_eps),
// evaluated as a one-sided width-p window kernel over the overlap engine.
double conditional_loglik(const std::vector<Partition>& parts, const std::vector<Matrix>& ar,
                          const Matrix& sigma_eps, const EngineOptions& opt = {});
double conditional_loglik(const RegularSeries& series, const std::vector<Matrix>& ar,
                          const Matrix& sigma_eps, const OverlapLayout& layout,
                          const EngineOptions& opt = {});

// Ascent-direction gradients dL/dA_k of the value conditional_loglik
// computes: sum_t Sigma^{-1} r_t X_{t-k}^T.
std::vector<Matrix> conditional_loglik_grad(const std::vector<Partition>& parts,
                                            const std::vector<Matrix>& ar,
                                            const Matrix& sigma_eps,
                                            const EngineOptions& opt = {});
std::vector<Matrix> conditional_loglik_grad(const RegularSeries& series,
                                            const std::vector<Matrix>& ar,
                                            const Matrix& sigma_eps, const OverlapLayout& layout,
                                            const EngineOptions& opt = {});

// 2/(m + L) for Hessian spectrum extremes 0 < m <= L; the step size with the
// provably geometric contraction (L-m)/(L+m) on strongly concave quadratics.
double two_over_m_plus_L(double hessian_spectrum_min, double hessian_spectrum_max);

// Conditional-MLE AR(p) fit by gradient ascent (full-batch or stochastic).
// If sigma_eps is absent it starts from the identity and alternates
// (fit A, Sigma <- residual covariance) for opts.rounds rounds, returning the
// final residual covariance as Sigma_eps.
FittedModel fit_ar_mle(const RegularSeries& series, int p,
                       std::optional<Matrix> sigma_eps, const MleOptions& opts,
                       const OverlapLayout& layout, const EngineOptions& engine = {});
FittedModel fit_ar_mle(const RegularSeries& series, int p,
                       std::optional<Matrix> sigma_eps = std::nullopt,
                       const MleOptions& opts = {});

namespace detail {

// The shared ascent core over a flattened parameter vector. step_m/step_L
// feed the eigen_two_over_m_plus_L rule; divergence under a fixed step (five
// consecutive objective decreases) raises NumericalError advising
// backtracking.
struct AscentProblem {
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> gradient;
  std::function<void(int, const Vector&)> on_iterate;  // optional trace hook
};

struct AscentResult {
  Vector x;
  bool converged = false;
  int iters = 0;
};

AscentResult gradient_ascent(const AscentProblem& problem, Vector x0, const MleOptions& opts,
                             double step_m, double step_L);

}  // namespace detail

}  // namespace tsfit
