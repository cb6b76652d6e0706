#include "tsfit/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <utility>

#include "tsfit/errors.hpp"

namespace tsfit {

namespace {

void check_square_finite(const Matrix& m, Eigen::Index d, const char* what) {
  if (m.rows() != d || m.cols() != d) throw DomainError(std::string(what) + ": wrong shape");
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

CompanionMatrix companion_of(const std::vector<Matrix>& blocks, Eigen::Index d, double sign) {
  const int order = static_cast<int>(blocks.size());
  CompanionMatrix c;
  c.order = order;
  c.d = d;
  c.matrix = Matrix::Zero(order * d, order * d);
  for (int k = 0; k < order; ++k) c.matrix.block(0, k * d, d, d) = sign * blocks[k];
  for (int k = 1; k < order; ++k)
    c.matrix.block(k * d, (k - 1) * d, d, d) = Matrix::Identity(d, d);
  return c;
}

}  // namespace

void ArmaModel::validate() const {
  if (d < 1) throw DomainError("ArmaModel: d must be >= 1");
  for (const auto& a : ar) check_square_finite(a, d, "ArmaModel AR coefficient");
  for (const auto& b : ma) check_square_finite(b, d, "ArmaModel MA coefficient");
  check_square_finite(sigma_eps, d, "ArmaModel sigma_eps");
  if ((sigma_eps - sigma_eps.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("ArmaModel: sigma_eps not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_eps, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("ArmaModel: eigensolve of sigma_eps failed");
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw DomainError("ArmaModel: sigma_eps has a negative eigenvalue");
}

ArmaModel ArmaModel::white_noise(const Matrix& sigma) {
  ArmaModel m;
  m.d = sigma.rows();
  m.sigma_eps = sigma;
  return m;
}

ArmaModel ArmaModel::pure_ar(std::vector<Matrix> ar, Matrix sigma) {
  ArmaModel m;
  m.d = sigma.rows();
  m.ar = std::move(ar);
  m.sigma_eps = std::move(sigma);
  return m;
}

ArmaModel ArmaModel::pure_ma(std::vector<Matrix> ma, Matrix sigma) {
  ArmaModel m;
  m.d = sigma.rows();
  m.ma = std::move(ma);
  m.sigma_eps = std::move(sigma);
  return m;
}

CompanionMatrix ar_companion(const ArmaModel& model) {
  return companion_of(model.ar, model.d, 1.0);
}

CompanionMatrix ma_companion(const ArmaModel& model) {
  return companion_of(model.ma, model.d, -1.0);
}

double spectral_radius(const CompanionMatrix& companion, const char* name) {
  Eigen::EigenSolver<Matrix> es(companion.matrix, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw NumericalError(std::string("spectral_radius: eigenvalue iteration failed on ") + name);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_causal(const ArmaModel& model, double tol) {
  if (tol <= 0.0 || tol >= 1.0) throw DomainError("is_causal: tol must be in (0, 1)");
  if (model.p() == 0) return true;
  return spectral_radius(ar_companion(model), "AR companion") < 1.0 - tol;
}

bool is_invertible(const ArmaModel& model, double tol) {
  if (tol <= 0.0 || tol >= 1.0) throw DomainError("is_invertible: tol must be in (0, 1)");
  if (model.q() == 0) return true;
  return spectral_radius(ma_companion(model), "MA companion") < 1.0 - tol;
}

PsiWeights psi_weights(const ArmaModel& model, int k_max) {
  model.validate();
  if (k_max < 0) throw DomainError("psi_weights: k_max must be >= 0");
  if (!is_causal(model)) throw DomainError("psi_weights: model is not causal");
  PsiWeights w;
  w.d = model.d;
  w.psi.reserve(k_max + 1);
  w.psi.push_back(Matrix::Identity(model.d, model.d));
  for (int j = 1; j <= k_max; ++j) {
    Matrix psi_j = (j <= model.q()) ? model.ma[j - 1] : Matrix::Zero(model.d, model.d);
    const int imax = std::min(j, model.p());
    for (int i = 1; i <= imax; ++i) psi_j += model.ar[i - 1] * w.psi[j - i];
    w.psi.push_back(std::move(psi_j));
  }
  return w;
}

LaggedCovariance model_autocovariance(const ArmaModel& model, int h_max, int k_trunc) {
  if (h_max < 0) throw DomainError("model_autocovariance: h_max must be >= 0");
  if (k_trunc == 0) k_trunc = std::max(200, h_max + 50 * std::max(model.p(), 1));
  if (k_trunc < h_max + 10 * model.p())
    throw DomainError("model_autocovariance: k_trunc below the h_max + 10p floor");
  const PsiWeights w = psi_weights(model, k_trunc);  // rejects non-causal models
  std::vector<Matrix> gamma;
  gamma.reserve(h_max + 1);
  for (int h = 0; h <= h_max; ++h) {
    // Stored orientation gamma(h) = E[X_t X_{t+h}^T] = sum_j Psi_j S Psi_{j+h}^T,
    // matching the sample estimator's X_k X_{k+h}^T.
    Matrix g = Matrix::Zero(model.d, model.d);
    for (int j = 0; j + h <= k_trunc; ++j)
      g += w.psi[j] * model.sigma_eps * w.psi[j + h].transpose();
    gamma.push_back(std::move(g));
  }
  return LaggedCovariance(std::move(gamma), 0, CovNormalization::exact_model);
}

RegularSeries simulate(const ArmaModel& model, std::int64_t n, std::int64_t burn_in,
                       std::uint64_t seed) {
  model.validate();
  if (n < 1) throw DomainError("simulate: n must be >= 1");
  if (burn_in < 0) throw DomainError("simulate: burn_in must be >= 0");
  if (!is_causal(model)) throw DomainError("simulate: model is not causal");

  const Eigen::Index d = model.d;
  // Symmetric PSD square root; negative eigenvalues (within the validated
  // -1e-10 slack) clamp to zero so semidefinite noise is handled uniformly.
  Eigen::SelfAdjointEigenSolver<Matrix> es(model.sigma_eps);
  if (es.info() != Eigen::Success)
    throw NumericalError("simulate: eigensolve of sigma_eps failed");
  const Matrix root = es.eigenvectors() *
                      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                      es.eigenvectors().transpose();

  // Box-Muller on a fixed-seed mt19937_64 keeps the noise stream independent
  // of standard-library distribution internals.
  std::mt19937_64 rng(seed);
  auto next_unit = [&rng]() {
    // in (0, 1]: avoids log(0)
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  double spare = 0.0;
  bool has_spare = false;
  auto next_gauss = [&]() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u = next_unit();
    const double v = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u));
    spare = r * std::sin(2.0 * M_PI * v);
    has_spare = true;
    return r * std::cos(2.0 * M_PI * v);
  };

  const int p = model.p();
  const int q = model.q();
  const std::int64_t total = burn_in + n;
  RowMatrix xs = RowMatrix::Zero(total, d);
  RowMatrix eps = RowMatrix::Zero(total, d);
  Vector raw(d);
  for (std::int64_t t = 0; t < total; ++t) {
    for (Eigen::Index i = 0; i < d; ++i) raw(i) = next_gauss();
    eps.row(t) = (root * raw).transpose();
    Vector x = eps.row(t).transpose();
    for (int k = 1; k <= p; ++k)
      if (t - k >= 0) x += model.ar[k - 1] * xs.row(t - k).transpose();
    for (int j = 1; j <= q; ++j)
      if (t - j >= 0) x += model.ma[j - 1] * eps.row(t - j).transpose();
    xs.row(t) = x.transpose();
  }
  RegularSeries out;
  out.start_index = 0;
  out.values = xs.bottomRows(n);
  return out;
}

}  // namespace tsfit
