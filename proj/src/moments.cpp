#include "tsfit/moments.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "tsfit/accumulate.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/kernels/simd.hpp"

namespace tsfit {

namespace {

template <bool Exact>
struct MeanKernel {
  Eigen::Index d;

  std::int64_t half_width() const { return 0; }
  CenterPolicy policy() const { return CenterPolicy::forward; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* r = v.row(t);
    if (!r) return;
    for (Eigen::Index i = 0; i < d; ++i) acc.add(static_cast<std::size_t>(i), r[i]);
    ++acc.centers;
  }
};

// One lag of the per-lag estimator: deposits X_t[i] * X_{t+h}[j].
template <bool Exact>
struct PerLagKernel {
  Eigen::Index d;
  int h;

  std::int64_t half_width() const { return h; }
  CenterPolicy policy() const { return CenterPolicy::forward; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* w = v.window(t, t + h + 1);
    if (!w) return;
    const double* xt = w;
    const double* xh = w + static_cast<std::size_t>(h) * d;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        acc.add(static_cast<std::size_t>(i * d + j), xt[i] * xh[j]);
    ++acc.centers;
  }
  void accumulate_range(const PartitionView& v, std::int64_t t0, std::int64_t t1,
                        Lanes<Exact>& acc) const {
    if (d != 1) {
      for (std::int64_t t = t0; t < t1; ++t) accumulate(v, t, acc);
      return;
    }
    const double* w = v.window(t0, t1 + h);  // rows t0 .. t1-1+h
    if (!w) return;
    const int lag = h;
    if constexpr (Exact) {
      simd::lag_products_exact(w, 0, t1 - t0, &lag, 1, acc.lane.data());
    } else {
      simd::lag_products_fast(w, 0, t1 - t0, &lag, 1, acc.lane.data());
    }
    acc.centers += t1 - t0;
  }
};

// Full-stack kernel of the joint estimator: lane ((h+H)*d + i)*d + j holds
// the running sum of X_t[i] * X_{t+h}[j], h in [-H, H].
template <bool Exact>
struct JointKernel {
  Eigen::Index d;
  int h_max;

  std::int64_t half_width() const { return h_max; }
  CenterPolicy policy() const { return CenterPolicy::interior_only; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* w = v.window(t - h_max, t + h_max + 1);
    if (!w) return;
    const double* xt = w + static_cast<std::size_t>(h_max) * d;
    for (int h = -h_max; h <= h_max; ++h) {
      const double* xh = w + static_cast<std::size_t>(h + h_max) * d;
      const std::size_t base = static_cast<std::size_t>(h + h_max) * d * d;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          acc.add(base + static_cast<std::size_t>(i * d + j), xt[i] * xh[j]);
    }
    ++acc.centers;
  }
  void accumulate_range(const PartitionView& v, std::int64_t t0, std::int64_t t1,
                        Lanes<Exact>& acc) const {
    if (d != 1) {
      for (std::int64_t t = t0; t < t1; ++t) accumulate(v, t, acc);
      return;
    }
    const double* w = v.window(t0 - h_max, t1 + h_max);
    if (!w) return;
    std::vector<int> lags(static_cast<std::size_t>(2 * h_max + 1));
    for (int h = -h_max; h <= h_max; ++h) lags[static_cast<std::size_t>(h + h_max)] = h;
    // Local center index runs [h_max, h_max + t1 - t0) within the window.
    if constexpr (Exact) {
      simd::lag_products_exact(w, h_max, h_max + (t1 - t0), lags.data(),
                               static_cast<int>(lags.size()), acc.lane.data());
    } else {
      simd::lag_products_fast(w, h_max, h_max + (t1 - t0), lags.data(),
                              static_cast<int>(lags.size()), acc.lane.data());
    }
    acc.centers += t1 - t0;
  }
};

template <bool Exact, class Kernel>
Lanes<Exact> run(const std::vector<Partition>& parts, const Kernel& kernel, std::size_t width,
                 const EngineOptions& opt) {
  return map_reduce(parts, kernel, LanesMonoid<Exact>{width}, opt);
}

Eigen::Index dim_of(const std::vector<Partition>& parts) {
  if (parts.empty()) throw DomainError("estimator: no partitions");
  return parts.front().dim;
}

template <bool Exact>
Vector mean_impl(const std::vector<Partition>& parts, const EngineOptions& opt) {
  const Eigen::Index d = dim_of(parts);
  const std::int64_t n = parts.front().n;
  auto acc = run<Exact>(parts, MeanKernel<Exact>{d}, static_cast<std::size_t>(d), opt);
  Vector mu(d);
  for (Eigen::Index i = 0; i < d; ++i)
    mu(i) = acc.value(static_cast<std::size_t>(i)) / static_cast<double>(n);
  return mu;
}

template <bool Exact>
LaggedCovariance per_lag_impl(const std::vector<Partition>& parts, int h_max,
                              const EngineOptions& opt) {
  const Eigen::Index d = dim_of(parts);
  const std::int64_t n = parts.front().n;
  std::vector<Matrix> gamma;
  gamma.reserve(static_cast<std::size_t>(h_max) + 1);
  for (int h = 0; h <= h_max; ++h) {
    auto acc = run<Exact>(parts, PerLagKernel<Exact>{d, h}, static_cast<std::size_t>(d * d), opt);
    Matrix g(d, d);
    const double norm = static_cast<double>(n - h - 1);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        g(i, j) = acc.value(static_cast<std::size_t>(i * d + j)) / norm;
    gamma.push_back(std::move(g));
  }
  return LaggedCovariance(std::move(gamma), n, CovNormalization::per_lag_unbiased);
}

template <bool Exact>
LaggedCovariance joint_impl(const std::vector<Partition>& parts, int h_max,
                            const EngineOptions& opt) {
  const Eigen::Index d = dim_of(parts);
  const std::int64_t n = parts.front().n;
  const std::size_t dd = static_cast<std::size_t>(d * d);
  auto acc = run<Exact>(parts, JointKernel<Exact>{d, h_max},
                        static_cast<std::size_t>(2 * h_max + 1) * dd, opt);
  const double norm = static_cast<double>(n - (2 * h_max + 1));
  auto stack = [&](int h, Eigen::Index i, Eigen::Index j) {
    return acc.value(static_cast<std::size_t>(h + h_max) * dd + static_cast<std::size_t>(i * d + j));
  };
  std::vector<Matrix> gamma;
  gamma.reserve(static_cast<std::size_t>(h_max) + 1);
  for (int h = 0; h <= h_max; ++h) {
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        g(i, j) = (stack(h, i, j) + stack(-h, j, i)) / (2.0 * norm);
    gamma.push_back(std::move(g));
  }
  return LaggedCovariance(std::move(gamma), n, CovNormalization::joint_biased);
}

}  // namespace

Vector mean(const std::vector<Partition>& parts, const EngineOptions& opt) {
  return opt.deterministic ? mean_impl<true>(parts, opt) : mean_impl<false>(parts, opt);
}

Vector mean(const RegularSeries& series, const OverlapLayout& layout, const EngineOptions& opt) {
  return mean(make_partitions(series, layout), opt);
}

RegularSeries center(const RegularSeries& series, const Vector& mu) {
  series.validate();
  if (mu.size() != series.d()) throw DomainError("center: mu dimension mismatch");
  RegularSeries out = series;
  out.values.rowwise() -= mu.transpose();
  return out;
}

LaggedCovariance autocovariance_per_lag(const std::vector<Partition>& parts, int h_max,
                                        const EngineOptions& opt) {
  if (h_max < 0) throw DomainError("autocovariance_per_lag: h_max must be >= 0");
  if (h_max >= parts.front().n - 1)
    throw DomainError("autocovariance_per_lag: need h_max < n - 1");
  return opt.deterministic ? per_lag_impl<true>(parts, h_max, opt)
                           : per_lag_impl<false>(parts, h_max, opt);
}

LaggedCovariance autocovariance_per_lag(const RegularSeries& series, const OverlapLayout& layout,
                                        int h_max, const EngineOptions& opt) {
  return autocovariance_per_lag(make_partitions(series, layout), h_max, opt);
}

LaggedCovariance autocovariance_joint(const std::vector<Partition>& parts, int h_max,
                                      const EngineOptions& opt) {
  if (h_max < 0) throw DomainError("autocovariance_joint: h_max must be >= 0");
  if (2 * static_cast<std::int64_t>(h_max) + 1 >= parts.front().n)
    throw DomainError("autocovariance_joint: need 2*h_max + 1 < n");
  return opt.deterministic ? joint_impl<true>(parts, h_max, opt)
                           : joint_impl<false>(parts, h_max, opt);
}

LaggedCovariance autocovariance_joint(const RegularSeries& series, const OverlapLayout& layout,
                                      int h_max, const EngineOptions& opt) {
  return autocovariance_joint(make_partitions(series, layout), h_max, opt);
}

Correlogram autocorrelation(const LaggedCovariance& cov) {
  const Eigen::Index d = cov.d();
  Vector diag = cov.gamma_nonneg(0).diagonal();
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(diag(i) > 0.0))
      throw DomainError("autocorrelation: non-positive variance in coordinate " +
                        std::to_string(i));
  const Vector scale = diag.cwiseSqrt().cwiseInverse();
  Correlogram out;
  out.rho.reserve(static_cast<std::size_t>(cov.h_max()) + 1);
  for (int h = 0; h <= cov.h_max(); ++h)
    out.rho.push_back(scale.asDiagonal() * cov.gamma_nonneg(h) * scale.asDiagonal());
  return out;
}

PartialCorrelogram pacf(const LaggedCovariance& cov, int p_max, double ridge) {
  if (p_max < 1) throw DomainError("pacf: p_max must be >= 1");
  if (cov.h_max() < p_max) throw DomainError("pacf: covariance has too few lags");
  const Eigen::Index d = cov.d();
  PartialCorrelogram out;
  out.kappa.reserve(static_cast<std::size_t>(p_max));
  for (int p = 1; p <= p_max; ++p) {
    Matrix toeplitz(p * d, p * d);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) toeplitz.block(i * d, j * d, d, d) = cov.gamma(i - j);
    if (ridge != 0.0) toeplitz.diagonal().array() += ridge;
    Matrix rhs(p * d, d);
    for (int i = 0; i < p; ++i) rhs.middleRows(i * d, d) = cov.gamma(i + 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(toeplitz);
    if (es.info() != Eigen::Success)
      throw NumericalError("pacf: eigensolve failed at order " + std::to_string(p));
    const double lo = es.eigenvalues().cwiseAbs().minCoeff();
    const double hi = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(lo > hi * 1e-13))
      throw SingularMomentMatrix("pacf: singular block-Toeplitz system at order " +
                                     std::to_string(p),
                                 p, lo > 0 ? hi / lo : std::numeric_limits<double>::infinity());
    const Matrix solution = es.eigenvectors() *
                            es.eigenvalues().cwiseInverse().asDiagonal() *
                            es.eigenvectors().transpose() * rhs;
    out.kappa.push_back(solution.bottomRows(d).transpose());
  }
  return out;
}

double significance_band(std::int64_t n) {
  if (n < 2) throw DomainError("significance_band: need n >= 2");
  return 1.96 / std::sqrt(static_cast<double>(n));
}

}  // namespace tsfit
