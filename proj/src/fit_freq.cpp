#include "tsfit/fit_freq.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tsfit/errors.hpp"

namespace tsfit {

namespace {

constexpr double kConditionLimit = 1e12;

void flag_stability(FittedModel& fit) {
  if (!is_causal(fit.model)) fit.warnings.push_back("non_causal");
  if (!is_invertible(fit.model)) fit.warnings.push_back("non_invertible");
}

// Symmetric solve with a condition estimate; throws SingularMomentMatrix
// when the matrix is effectively singular.
Matrix solve_symmetric(const Matrix& lhs, const Matrix& rhs, int order, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(lhs);
  if (es.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": eigensolve failed");
  const double lo = es.eigenvalues().cwiseAbs().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw SingularMomentMatrix(std::string(what) + ": singular block-Toeplitz system",
                               order, lo > 0 ? hi / lo : std::numeric_limits<double>::infinity());
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose() * rhs;
}

Matrix inverse_with_condition_check(const Matrix& m, int index, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": eigensolve failed");
  const double lo = es.eigenvalues().cwiseAbs().minCoeff();
  const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw NumericalError(std::string(what) + ": innovation covariance Sigma_" +
                         std::to_string(index) + " is singular (condition " +
                         std::to_string(lo > 0 ? hi / lo : std::numeric_limits<double>::infinity()) +
                         ")");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

bool FittedModel::has_warning(const std::string& w) const {
  return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
}

FittedModel fit_ar_yule_walker(const LaggedCovariance& cov, int p) {
  if (p < 0) throw DomainError("fit_ar_yule_walker: p must be >= 0");
  if (cov.h_max() < p) throw DomainError("fit_ar_yule_walker: covariance has too few lags");
  const Eigen::Index d = cov.d();

  FittedModel fit;
  fit.method = "yule_walker";
  fit.model.d = d;
  if (p == 0) {
    fit.model.sigma_eps = 0.5 * (cov.gamma_nonneg(0) + cov.gamma_nonneg(0).transpose());
    return fit;
  }

  Matrix toeplitz(p * d, p * d);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) toeplitz.block(i * d, j * d, d, d) = cov.gamma(i - j);
  Matrix rhs(p * d, d);
  for (int i = 0; i < p; ++i) rhs.middleRows(i * d, d) = cov.gamma(i + 1);
  const Matrix stacked = solve_symmetric(toeplitz, rhs, p, "fit_ar_yule_walker");

  fit.model.ar.reserve(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) fit.model.ar.push_back(stacked.middleRows(k * d, d).transpose());

  Matrix sigma = cov.gamma_nonneg(0);
  for (int k = 1; k <= p; ++k) sigma -= fit.model.ar[static_cast<std::size_t>(k - 1)] * cov.gamma(k);
  fit.model.sigma_eps = 0.5 * (sigma + sigma.transpose());
  flag_stability(fit);
  return fit;
}

DurbinLevinsonResult fit_ar_durbin_levinson(const LaggedCovariance& cov, int p) {
  if (cov.d() != 1) throw DomainError("fit_ar_durbin_levinson: univariate only");
  if (p < 1) throw DomainError("fit_ar_durbin_levinson: p must be >= 1");
  if (cov.h_max() < p) throw DomainError("fit_ar_durbin_levinson: covariance has too few lags");
  const double g0 = cov.gamma_nonneg(0)(0, 0);
  if (!(g0 > 0.0)) throw NumericalError("fit_ar_durbin_levinson: gamma(0) must be positive");
  auto g = [&](int h) { return cov.gamma_nonneg(h)(0, 0); };

  std::vector<double> phi(static_cast<std::size_t>(p), 0.0);
  std::vector<double> prev(static_cast<std::size_t>(p), 0.0);
  std::vector<double> reflection;
  reflection.reserve(static_cast<std::size_t>(p));
  double v = g0;
  for (int m = 1; m <= p; ++m) {
    double num = g(m);
    for (int j = 1; j < m; ++j) num -= prev[static_cast<std::size_t>(j - 1)] * g(m - j);
    const double k = num / v;
    phi[static_cast<std::size_t>(m - 1)] = k;
    for (int j = 1; j < m; ++j)
      phi[static_cast<std::size_t>(j - 1)] =
          prev[static_cast<std::size_t>(j - 1)] - k * prev[static_cast<std::size_t>(m - j - 1)];
    v *= 1.0 - k * k;
    if (!(v > 0.0))
      throw NumericalError(
          "fit_ar_durbin_levinson: non-positive prediction variance at order " +
          std::to_string(m));
    reflection.push_back(k);
    prev = phi;
  }

  DurbinLevinsonResult out;
  out.fit.method = "durbin_levinson";
  out.fit.model.d = 1;
  out.fit.model.ar.reserve(static_cast<std::size_t>(p));
  for (double a : phi) out.fit.model.ar.push_back(Matrix::Constant(1, 1, a));
  out.fit.model.sigma_eps = Matrix::Constant(1, 1, v);
  out.reflection = std::move(reflection);
  flag_stability(out.fit);
  return out;
}

InnovationState innovations(const LaggedCovariance& cov, int m_max) {
  if (m_max < 1) throw DomainError("innovations: m_max must be >= 1");
  if (cov.h_max() < m_max) throw DomainError("innovations: covariance has too few lags");
  const Eigen::Index d = cov.d();

  InnovationState st;
  st.d = d;
  st.sigma.reserve(static_cast<std::size_t>(m_max) + 1);
  st.sigma.push_back(cov.gamma_nonneg(0));
  st.theta.resize(static_cast<std::size_t>(m_max));

  std::vector<Matrix> sigma_inv;
  sigma_inv.reserve(static_cast<std::size_t>(m_max));
  sigma_inv.push_back(inverse_with_condition_check(st.sigma[0], 0, "innovations"));

  for (int m = 1; m <= m_max; ++m) {
    auto& row = st.theta[static_cast<std::size_t>(m - 1)];
    row.assign(static_cast<std::size_t>(m), Matrix::Zero(d, d));
    // Theta_{m,m-j} = [gamma(j-m) - sum_{i=0}^{j-1} Theta_{m,m-i} Sigma_i Theta_{j,j-i}^T] Sigma_j^{-1}
    for (int j = 0; j < m; ++j) {
      Matrix acc = cov.gamma(j - m);
      for (int i = 0; i < j; ++i) {
        const Matrix& theta_m = row[static_cast<std::size_t>(m - i - 1)];         // Theta_{m,m-i}
        const Matrix& theta_j =
            st.theta[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(j - i - 1)];  // Theta_{j,j-i}
        acc -= theta_m * st.sigma[static_cast<std::size_t>(i)] * theta_j.transpose();
      }
      row[static_cast<std::size_t>(m - j - 1)] = acc * sigma_inv[static_cast<std::size_t>(j)];
    }
    Matrix sigma_m = cov.gamma_nonneg(0);
    for (int i = 0; i < m; ++i) {
      const Matrix& theta_m = row[static_cast<std::size_t>(m - i - 1)];
      sigma_m -= theta_m * st.sigma[static_cast<std::size_t>(i)] * theta_m.transpose();
    }
    sigma_m = 0.5 * (sigma_m + sigma_m.transpose());
    st.sigma.push_back(sigma_m);
    if (m < m_max)
      sigma_inv.push_back(inverse_with_condition_check(sigma_m, m, "innovations"));
  }
  return st;
}

FittedModel fit_ma(const LaggedCovariance& cov, int q, int m) {
  if (q < 0) throw DomainError("fit_ma: q must be >= 0");
  if (m == 0) m = q + 20;
  if (m < q) throw DomainError("fit_ma: recursion depth m must be >= q");
  FittedModel fit;
  fit.method = "innovations";
  fit.model.d = cov.d();
  fit.m_depth = m;
  if (q == 0) {
    fit.model.sigma_eps = 0.5 * (cov.gamma_nonneg(0) + cov.gamma_nonneg(0).transpose());
    return fit;
  }
  const InnovationState st = innovations(cov, m);
  fit.model.ma.reserve(static_cast<std::size_t>(q));
  for (int j = 1; j <= q; ++j) fit.model.ma.push_back(st.theta_at(m, j));
  fit.model.sigma_eps = st.sigma.back();
  flag_stability(fit);
  return fit;
}

FittedModel fit_arma(const LaggedCovariance& cov, int p, int q, int m) {
  if (p < 0 || q < 0) throw DomainError("fit_arma: orders must be >= 0");
  if (m == 0) m = p + q + 20;
  if (m < p + q) throw DomainError("fit_arma: recursion depth m must be >= p + q");
  if (p == 0) {
    FittedModel fit = fit_ma(cov, q, m);
    fit.method = "arma_hybrid";
    return fit;
  }
  const Eigen::Index d = cov.d();
  const InnovationState st = innovations(cov, m);
  // Psi_hat_j := Theta_{m,j}, with Psi_0 = I and Psi_j = 0 for j < 0.
  auto psi = [&](int j) -> Matrix {
    if (j < 0) return Matrix::Zero(d, d);
    if (j == 0) return Matrix::Identity(d, d);
    return st.theta_at(m, j);
  };

  Matrix system(p * d, p * d);
  for (int r = 1; r <= p; ++r)
    for (int i = 1; i <= p; ++i)
      system.block((r - 1) * d, (i - 1) * d, d, d) = psi(q + r - i).transpose();
  Matrix rhs(p * d, d);
  for (int r = 1; r <= p; ++r) rhs.middleRows((r - 1) * d, d) = psi(q + r).transpose();

  Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13))
    throw SingularMomentMatrix("fit_arma: singular Psi block-Toeplitz system", p,
                               rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
  const Matrix stacked = lu.solve(rhs);

  FittedModel fit;
  fit.method = "arma_hybrid";
  fit.model.d = d;
  fit.m_depth = m;
  fit.model.ar.reserve(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) fit.model.ar.push_back(stacked.middleRows(k * d, d).transpose());
  fit.model.ma.reserve(static_cast<std::size_t>(q));
  for (int j = 1; j <= q; ++j) {
    Matrix b = psi(j);
    for (int i = 1; i <= std::min(j, p); ++i)
      b -= fit.model.ar[static_cast<std::size_t>(i - 1)] * psi(j - i);
    fit.model.ma.push_back(std::move(b));
  }
  fit.model.sigma_eps = st.sigma.back();
  flag_stability(fit);
  return fit;
}

}  // namespace tsfit
