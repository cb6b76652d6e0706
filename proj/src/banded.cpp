#include "tsfit/banded.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <mutex>

#include "tsfit/accumulate.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/kernels/simd.hpp"

namespace tsfit {

namespace {

void check_partitions(const std::vector<std::pair<int, int>>& parts, int d) {
  if (parts.empty()) throw DomainError("banded: need at least one spatial partition");
  int expected = 0;
  for (const auto& [a, b] : parts) {
    if (a != expected || b <= a) throw DomainError("banded: partitions must tile [0, d)");
    expected = b;
  }
  if (expected != d) throw DomainError("banded: partitions must tile [0, d)");
}

// Guarded halo column access: out-of-halo requests are refused and counted,
// never served.
struct HaloView {
  const SpatialHalo* halo;

  const double* time_row(std::int64_t t) const {
    return halo->data.data() + t * (halo->cols_end - halo->cols_begin);
  }
  bool serves(int col) const {
    if (col < halo->cols_begin || col >= halo->cols_end) {
      ++halo->refused_reads;
      return false;
    }
    return true;
  }
};

}  // namespace

Matrix BandedArModel::dense() const {
  Matrix a = Matrix::Zero(d, d);
  for (int k = -bandwidth; k <= bandwidth; ++k)
    for (int i = std::max(0, -k); i < std::min(d, d - k); ++i)
      a(i, i + k) = diags(k + bandwidth, i);
  return a;
}

Matrix BandedArModel::dense_precision() const {
  Matrix pi = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    const auto [a, b] = partitions[i];
    pi.block(a, a, b - a, b - a) = precision[i];
  }
  return pi;
}

Matrix BandedArModel::dense_sigma() const {
  Matrix sigma = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    const auto [a, b] = partitions[i];
    Eigen::LLT<Matrix> llt(precision[i]);
    if (llt.info() != Eigen::Success)
      throw DomainError("BandedArModel: precision block is not SPD");
    sigma.block(a, a, b - a, b - a) = llt.solve(Matrix::Identity(b - a, b - a));
  }
  return sigma;
}

void BandedArModel::validate() const {
  if (d < 1 || bandwidth < 0 || bandwidth >= d)
    throw DomainError("BandedArModel: need d >= 1 and 0 <= bandwidth < d");
  if (diags.rows() != 2 * bandwidth + 1 || diags.cols() != d)
    throw DomainError("BandedArModel: diagonal storage has wrong shape");
  for (int k = -bandwidth; k <= bandwidth; ++k) {
    for (int i = 0; i < d; ++i) {
      const bool off_matrix = i + k < 0 || i + k >= d;
      if (off_matrix && diags(k + bandwidth, i) != 0.0)
        throw DomainError("BandedArModel: nonzero entry outside the matrix");
    }
  }
  check_partitions(partitions, d);
  if (precision.size() != partitions.size())
    throw DomainError("BandedArModel: one precision block per partition required");
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    const int len = partitions[i].second - partitions[i].first;
    const Matrix& pi = precision[i];
    if (pi.rows() != len || pi.cols() != len)
      throw DomainError("BandedArModel: precision block shape mismatch");
    if ((pi - pi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw DomainError("BandedArModel: precision block not symmetric");
    Eigen::LLT<Matrix> llt(pi);
    if (llt.info() != Eigen::Success)
      throw DomainError("BandedArModel: precision block not positive definite");
  }
}

BandedArModel BandedArModel::from_dense(const Matrix& a, int bandwidth,
                                        std::vector<std::pair<int, int>> partitions,
                                        std::vector<Matrix> precision) {
  const int d = static_cast<int>(a.rows());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (std::abs(i - j) > bandwidth && a(i, j) != 0.0)
        throw DomainError("BandedArModel::from_dense: entry outside the band");
  BandedArModel m;
  m.d = d;
  m.bandwidth = bandwidth;
  m.diags = RowMatrix::Zero(2 * bandwidth + 1, d);
  for (int k = -bandwidth; k <= bandwidth; ++k)
    for (int i = std::max(0, -k); i < std::min(d, d - k); ++i)
      m.diags(k + bandwidth, i) = a(i, i + k);
  m.partitions = std::move(partitions);
  m.precision = std::move(precision);
  m.validate();
  return m;
}

Vector banded_predict(const BandedArModel& model, const Vector& x_t) {
  if (x_t.size() != model.d) throw DomainError("banded_predict: dimension mismatch");
  Vector y(model.d);
  // Row i touches x[i-b .. i+b] only, so each row block reads just its halo.
  simd::banded_matvec(model.diags.data(), model.d, model.bandwidth, x_t.data(), y.data());
  return y;
}

std::vector<SpatialHalo> make_spatial_halos(const RegularSeries& series,
                                            const std::vector<std::pair<int, int>>& partitions,
                                            int bandwidth) {
  series.validate();
  const int d = static_cast<int>(series.d());
  check_partitions(partitions, d);
  std::vector<SpatialHalo> halos;
  halos.reserve(partitions.size());
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    SpatialHalo h;
    h.id = static_cast<int>(i);
    h.rows_begin = partitions[i].first;
    h.rows_end = partitions[i].second;
    h.cols_begin = std::max(0, h.rows_begin - bandwidth);
    h.cols_end = std::min(d, h.rows_end + bandwidth);
    h.data = series.values.middleCols(h.cols_begin, h.cols_end - h.cols_begin);
    halos.push_back(std::move(h));
  }
  return halos;
}

std::int64_t spatial_communication_counter(const std::vector<SpatialHalo>& halos) {
  std::int64_t total = 0;
  for (const auto& h : halos) total += h.refused_reads;
  return total;
}

namespace {

// Per-halo accumulation of the banded objective and gradient. Lane layout:
// lane 0 = quadratic part of the log-likelihood; lanes 1.. hold the gradient
// in diagonal storage order (k + b) * d + i for the owned rows.
template <bool Exact>
Lanes<Exact> halo_pass(const SpatialHalo& halo, const BandedArModel& model, bool want_grad) {
  const int b = model.bandwidth;
  const int d = model.d;
  const int rows = halo.rows_end - halo.rows_begin;
  const std::int64_t n = halo.data.rows();
  const Matrix& pi = model.precision[static_cast<std::size_t>(halo.id)];
  HaloView view{&halo};

  const std::size_t grad_width = want_grad ? static_cast<std::size_t>(2 * b + 1) * d : 0;
  Lanes<Exact> acc(1 + grad_width);
  Vector r(rows);
  Vector g(rows);
  for (std::int64_t t = 1; t < n; ++t) {
    const double* x_prev = view.time_row(t - 1);
    const double* x_now = view.time_row(t);
    for (int i = 0; i < rows; ++i) {
      const int row = halo.rows_begin + i;
      double pred = 0.0;
      for (int k = -b; k <= b; ++k) {
        const int col = row + k;
        if (col < 0 || col >= d) continue;
        if (!view.serves(col)) continue;  // refused reads are counted, not served
        pred += model.diags(k + b, row) * x_prev[col - halo.cols_begin];
      }
      r(i) = x_now[row - halo.cols_begin] - pred;
    }
    acc.add(0, -0.5 * r.dot(pi * r));
    if (want_grad) {
      g.noalias() = pi * r;
      for (int i = 0; i < rows; ++i) {
        const int row = halo.rows_begin + i;
        for (int k = -b; k <= b; ++k) {
          const int col = row + k;
          if (col < 0 || col >= d) continue;
          if (!view.serves(col)) continue;
          acc.add(1 + static_cast<std::size_t>(k + b) * d + static_cast<std::size_t>(row),
                  g(i) * x_prev[col - halo.cols_begin]);
        }
      }
    }
    ++acc.centers;
  }
  return acc;
}

template <bool Exact>
void run_halos(const std::vector<SpatialHalo>& halos, const BandedArModel& model, bool want_grad,
               const EngineOptions& opt, std::vector<Lanes<Exact>>& out) {
  out.clear();
  out.resize(halos.size());
  detail::run_over_partitions(static_cast<int>(halos.size()), opt.threads, [&](int i) {
    out[static_cast<std::size_t>(i)] =
        halo_pass<Exact>(halos[static_cast<std::size_t>(i)], model, want_grad);
  });
}

double log_norm_constant(const BandedArModel& model, std::int64_t terms) {
  double log_det_pi = 0.0;
  for (const auto& pi : model.precision) {
    Eigen::LLT<Matrix> llt(pi);
    if (llt.info() != Eigen::Success)
      throw DomainError("banded likelihood: precision block not SPD");
    for (Eigen::Index i = 0; i < pi.rows(); ++i)
      log_det_pi += 2.0 * std::log(llt.matrixL()(i, i));
  }
  return static_cast<double>(terms) *
         (-0.5 * static_cast<double>(model.d) * std::log(2.0 * M_PI) + 0.5 * log_det_pi);
}

template <bool Exact>
double loglik_from(const std::vector<SpatialHalo>& halos, const BandedArModel& model,
                   const EngineOptions& opt) {
  std::vector<Lanes<Exact>> per;
  run_halos<Exact>(halos, model, /*want_grad=*/false, opt, per);
  ExactSum quad_exact;
  double quad_fast = 0.0;
  std::int64_t terms = 0;
  for (auto& lanes : per) {
    if constexpr (Exact)
      quad_exact.merge(lanes.lane[0]);
    else
      quad_fast += lanes.lane[0];
  }
  terms = per.front().centers;
  const double quad = Exact ? quad_exact.round() : quad_fast;
  return quad + log_norm_constant(model, terms);
}

template <bool Exact>
RowMatrix grad_from(const std::vector<SpatialHalo>& halos, const BandedArModel& model,
                    const EngineOptions& opt) {
  std::vector<Lanes<Exact>> per;
  run_halos<Exact>(halos, model, /*want_grad=*/true, opt, per);
  const int b = model.bandwidth;
  const int d = model.d;
  RowMatrix grad = RowMatrix::Zero(2 * b + 1, d);
  // Owned rows partition {0..d-1}: each gradient entry comes from exactly
  // one halo, so assembly is copy, not reduction.
  for (const auto& halo : halos) {
    const auto& lanes = per[static_cast<std::size_t>(halo.id)];
    for (int row = halo.rows_begin; row < halo.rows_end; ++row)
      for (int k = -b; k <= b; ++k) {
        if (row + k < 0 || row + k >= d) continue;
        grad(k + b, row) =
            lanes.value(1 + static_cast<std::size_t>(k + b) * d + static_cast<std::size_t>(row));
      }
  }
  return grad;
}

std::pair<double, double> banded_hessian_extremes(const std::vector<SpatialHalo>& halos,
                                                  const BandedArModel& model,
                                                  const EngineOptions& opt) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::mutex m;
  detail::run_over_partitions(static_cast<int>(halos.size()), opt.threads, [&](int idx) {
    const auto& halo = halos[static_cast<std::size_t>(idx)];
    const int cols = halo.cols_end - halo.cols_begin;
    const std::int64_t n = halo.data.rows();
    Matrix s = Matrix::Zero(cols, cols);
    for (std::int64_t t = 0; t + 1 < n; ++t) {
      const auto x = Eigen::Map<const Vector>(halo.data.data() + t * cols, cols);
      s.noalias() += x * x.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es_s(s, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> es_pi(
        model.precision[static_cast<std::size_t>(halo.id)], Eigen::EigenvaluesOnly);
    if (es_s.info() != Eigen::Success || es_pi.info() != Eigen::Success)
      throw NumericalError("fit_banded_ar: eigensolve for the step size failed");
    std::lock_guard<std::mutex> lock(m);
    lo = std::min(lo, es_pi.eigenvalues().minCoeff() * es_s.eigenvalues().minCoeff());
    hi = std::max(hi, es_pi.eigenvalues().maxCoeff() * es_s.eigenvalues().maxCoeff());
  });
  return {lo, hi};
}

std::vector<Matrix> block_residual_precisions(const std::vector<SpatialHalo>& halos,
                                              const BandedArModel& model,
                                              const EngineOptions& opt) {
  std::vector<Matrix> out(halos.size());
  detail::run_over_partitions(static_cast<int>(halos.size()), opt.threads, [&](int idx) {
    const auto& halo = halos[static_cast<std::size_t>(idx)];
    const int b = model.bandwidth;
    const int d = model.d;
    const int rows = halo.rows_end - halo.rows_begin;
    const std::int64_t n = halo.data.rows();
    const int cols = halo.cols_end - halo.cols_begin;
    Matrix cov = Matrix::Zero(rows, rows);
    Vector r(rows);
    for (std::int64_t t = 1; t < n; ++t) {
      const double* x_prev = halo.data.data() + (t - 1) * cols;
      const double* x_now = halo.data.data() + t * cols;
      for (int i = 0; i < rows; ++i) {
        const int row = halo.rows_begin + i;
        double pred = 0.0;
        for (int k = -b; k <= b; ++k) {
          const int col = row + k;
          if (col < 0 || col >= d) continue;
          pred += model.diags(k + b, row) * x_prev[col - halo.cols_begin];
        }
        r(i) = x_now[row - halo.cols_begin] - pred;
      }
      cov.noalias() += r * r.transpose();
    }
    cov /= static_cast<double>(n - 1);
    cov = 0.5 * (cov + cov.transpose());
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("fit_banded_ar: degenerate block residual covariance");
    out[static_cast<std::size_t>(idx)] = llt.solve(Matrix::Identity(rows, rows));
  });
  return out;
}

}  // namespace

double banded_loglik(const std::vector<SpatialHalo>& halos, const BandedArModel& model,
                     const EngineOptions& opt) {
  return opt.deterministic ? loglik_from<true>(halos, model, opt)
                           : loglik_from<false>(halos, model, opt);
}

RowMatrix banded_loglik_grad(const std::vector<SpatialHalo>& halos, const BandedArModel& model,
                             const EngineOptions& opt) {
  return opt.deterministic ? grad_from<true>(halos, model, opt)
                           : grad_from<false>(halos, model, opt);
}

BandedFitResult fit_banded_ar(const RegularSeries& series, int bandwidth,
                              int num_spatial_partitions, const MleOptions& opts,
                              std::optional<std::vector<Matrix>> precision,
                              const EngineOptions& engine) {
  opts.validate();
  series.validate();
  if (opts.sgd)
    throw DomainError("fit_banded_ar: stochastic gradient is not supported on the banded path");
  const int d = static_cast<int>(series.d());
  if (bandwidth < 0 || bandwidth >= d)
    throw DomainError("fit_banded_ar: need 0 <= bandwidth < d");
  if (series.n() < 2) throw DomainError("fit_banded_ar: need n >= 2");

  const auto ranges = split_ranges(d, num_spatial_partitions);
  std::vector<std::pair<int, int>> partitions;
  partitions.reserve(ranges.size());
  for (const auto& [a, b] : ranges)
    partitions.emplace_back(static_cast<int>(a), static_cast<int>(b));

  BandedArModel model;
  model.d = d;
  model.bandwidth = bandwidth;
  model.diags = RowMatrix::Zero(2 * bandwidth + 1, d);
  model.partitions = partitions;
  const bool precision_known = precision.has_value();
  if (precision_known) {
    model.precision = std::move(*precision);
  } else {
    for (const auto& [a, b] : partitions)
      model.precision.push_back(Matrix::Identity(b - a, b - a));
  }
  model.validate();

  const auto halos = make_spatial_halos(series, partitions, bandwidth);

  // theta <-> diagonal storage: only in-matrix band slots are free parameters.
  std::vector<std::pair<int, int>> slots;  // (k + b, i)
  for (int k = -bandwidth; k <= bandwidth; ++k)
    for (int i = std::max(0, -k); i < std::min(d, d - k); ++i)
      slots.emplace_back(k + bandwidth, i);
  auto to_theta = [&](const RowMatrix& diags) {
    Vector x(static_cast<Eigen::Index>(slots.size()));
    for (std::size_t s = 0; s < slots.size(); ++s) x(static_cast<Eigen::Index>(s)) = diags(slots[s].first, slots[s].second);
    return x;
  };
  auto from_theta = [&](const Vector& x) {
    RowMatrix diags = RowMatrix::Zero(2 * bandwidth + 1, d);
    for (std::size_t s = 0; s < slots.size(); ++s) diags(slots[s].first, slots[s].second) = x(static_cast<Eigen::Index>(s));
    return diags;
  };

  const int rounds = precision_known ? 1 : opts.rounds;
  BandedFitResult out;
  for (int round = 0; round < rounds; ++round) {
    const auto [lo, hi] = banded_hessian_extremes(halos, model, engine);
    if (opts.step.kind == StepRule::Kind::eigen_two_over_m_plus_L && !(lo > 0.0))
      throw DomainError(
          "fit_banded_ar: halo moment matrix not positive definite; objective not "
          "strongly concave. Add a ridge or use backtracking");
    detail::AscentProblem problem;
    problem.objective = [&](const Vector& x) {
      BandedArModel trial = model;
      trial.diags = from_theta(x);
      return banded_loglik(halos, trial, engine);
    };
    problem.gradient = [&](const Vector& x) {
      BandedArModel trial = model;
      trial.diags = from_theta(x);
      return to_theta(banded_loglik_grad(halos, trial, engine));
    };
    MleOptions step_opts = opts;
    if (opts.step.kind == StepRule::Kind::backtracking && hi > 0.0)
      step_opts.step.eta = 2.0 / (lo > 0 ? lo + hi : hi);
    auto result = detail::gradient_ascent(problem, to_theta(model.diags), step_opts, lo, hi);
    model.diags = from_theta(result.x);
    out.converged = result.converged;
    out.iters = result.iters;
    if (!precision_known && round + 1 < rounds)
      model.precision = block_residual_precisions(halos, model, engine);
  }
  if (!precision_known)
    model.precision = block_residual_precisions(halos, model, engine);

  out.refused_reads = spatial_communication_counter(halos);
  if (!out.converged) out.warnings.push_back("not_converged");
  Eigen::EigenSolver<Matrix> es(model.dense(), /*computeEigenvectors=*/false);
  if (es.info() == Eigen::Success && es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0 - 1e-9)
    out.warnings.push_back("non_causal");
  out.model = std::move(model);
  return out;
}

}  // namespace tsfit
