#pragma once

#include <cstdint>
#include <vector>

#include "tsfit/lagged_covariance.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

// ARMA(p, q) model with d-dimensional observations:
//   X_t = A_1 X_{t-1} + ... + A_p X_{t-p} + eps_t + B_1 eps_{t-1} + ... + B_q eps_{t-q}
// AR and MA are the q = 0 / p = 0 special cases.
struct ArmaModel {
  Eigen::Index d = 1;
  std::vector<Matrix> ar;  // A_1..A_p
  std::vector<Matrix> ma;  // B_1..B_q
  Matrix sigma_eps;        // noise covariance, symmetric PSD

  int p() const { return static_cast<int>(ar.size()); }
  int q() const { return static_cast<int>(ma.size()); }

  // Shapes d x d and finite; sigma_eps symmetric within 1e-12 with
  // eigenvalues >= -1e-10.
  void validate() const;

  static ArmaModel white_noise(const Matrix& sigma);
  static ArmaModel pure_ar(std::vector<Matrix> ar, Matrix sigma);
  static ArmaModel pure_ma(std::vector<Matrix> ma, Matrix sigma);
};

// Block-companion matrix of an AR or MA coefficient stack (order*d square).
struct CompanionMatrix {
  int order = 0;
  Eigen::Index d = 1;
  Matrix matrix;
};

// Companion of A(z) = I - A_1 z - ... - A_p z^p (top block row A_1..A_p).
CompanionMatrix ar_companion(const ArmaModel& model);
// Companion of B(z) = I + B_1 z + ... + B_q z^q (top block row -B_1..-B_q).
CompanionMatrix ma_companion(const ArmaModel& model);

// Largest eigenvalue modulus; throws NumericalError if the eigensolver does
// not converge, naming the matrix.
double spectral_radius(const CompanionMatrix& companion, const char* name);

// True iff p = 0 or the AR companion spectral radius is < 1 - tol.
bool is_causal(const ArmaModel& model, double tol = 1e-9);
// True iff q = 0 or the MA companion spectral radius is < 1 - tol.
bool is_invertible(const ArmaModel& model, double tol = 1e-9);

// Weights of the causal moving-average representation X_t = sum_j Psi_j eps_{t-j}.
struct PsiWeights {
  Eigen::Index d = 1;
  std::vector<Matrix> psi;  // Psi_0..Psi_{k_max}, Psi_0 = I

  int k_max() const { return static_cast<int>(psi.size()) - 1; }
};

// Psi_0 = I; Psi_j = B_j + sum_{i=1}^{min(j,p)} A_i Psi_{j-i}, B_j = 0 for j > q.
// Requires a causal model.
PsiWeights psi_weights(const ArmaModel& model, int k_max);

// Truncated theoretical autocovariance of a causal model:
//   gamma(h) ~= sum_{j=0}^{k_trunc-h} Psi_{j+h} Sigma_eps Psi_j^T.
// k_trunc = 0 picks the default max(200, h_max + 50*max(p,1)).
LaggedCovariance model_autocovariance(const ArmaModel& model, int h_max, int k_trunc = 0);

// Simulates the ARMA recursion from a zero initial state with Gaussian noise
// (covariance sigma_eps via its symmetric PSD square root), discarding the
// first `burn_in` steps. Deterministic for a fixed seed.
RegularSeries simulate(const ArmaModel& model, std::int64_t n, std::int64_t burn_in = 1000,
                       std::uint64_t seed = 0);

}  // namespace tsfit
