#include "tsfit/fit_mle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>

#include "tsfit/accumulate.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/moments.hpp"

namespace tsfit {

namespace {

struct NoisePrecision {
  Matrix pi;        // Sigma^{-1}
  double log_norm;  // -d/2 log(2 pi) - 1/2 log det Sigma, the per-term constant
};

NoisePrecision precision_of(const Matrix& sigma_eps) {
  Eigen::LLT<Matrix> llt(sigma_eps);
  if (llt.info() != Eigen::Success)
    throw DomainError("conditional likelihood: sigma_eps must be symmetric positive definite");
  const Eigen::Index d = sigma_eps.rows();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  NoisePrecision out;
  out.pi = llt.solve(Matrix::Identity(d, d));
  out.pi = 0.5 * (out.pi + out.pi.transpose());
  out.log_norm = -0.5 * static_cast<double>(d) * std::log(2.0 * M_PI) - 0.5 * log_det;
  return out;
}

// Residual of the AR recursion at center t, reading the rows [t-p, t].
// w points at row t-p; stride d.
Vector residual_at(const double* w, int p, Eigen::Index d, const std::vector<Matrix>& ar) {
  Vector r = Eigen::Map<const Vector>(w + static_cast<std::size_t>(p) * d, d);
  for (int k = 1; k <= p; ++k)
    r.noalias() -= ar[static_cast<std::size_t>(k - 1)] *
                   Eigen::Map<const Vector>(w + static_cast<std::size_t>(p - k) * d, d);
  return r;
}

template <bool Exact>
struct LoglikKernel {
  Eigen::Index d;
  int p;
  const std::vector<Matrix>* ar;
  const NoisePrecision* noise;

  std::int64_t half_width() const { return p; }
  CenterPolicy policy() const { return CenterPolicy::backward; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* w = v.window(t - p, t + 1);
    if (!w) return;
    const Vector r = residual_at(w, p, d, *ar);
    acc.add(0, noise->log_norm - 0.5 * r.dot(noise->pi * r));
    ++acc.centers;
  }
};

template <bool Exact>
struct GradKernel {
  Eigen::Index d;
  int p;
  const std::vector<Matrix>* ar;
  const NoisePrecision* noise;

  std::int64_t half_width() const { return p; }
  CenterPolicy policy() const { return CenterPolicy::backward; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* w = v.window(t - p, t + 1);
    if (!w) return;
    const Vector g = noise->pi * residual_at(w, p, d, *ar);
    for (int k = 1; k <= p; ++k) {
      const double* lag = w + static_cast<std::size_t>(p - k) * d;
      const std::size_t base = static_cast<std::size_t>(k - 1) * d * d;
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          acc.add(base + static_cast<std::size_t>(i * d + j), g(i) * lag[j]);
    }
    ++acc.centers;
  }
};

// Lag-augmented second moment S = sum_t Z_t Z_t^T with Z_t = (X_{t-1}..X_{t-p}).
template <bool Exact>
struct LagMomentKernel {
  Eigen::Index d;
  int p;

  std::int64_t half_width() const { return p; }
  CenterPolicy policy() const { return CenterPolicy::backward; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* w = v.window(t - p, t + 1);
    if (!w) return;
    const Eigen::Index m = static_cast<Eigen::Index>(p) * d;
    // Z coordinate a = (k-1)*d + i reads lag k, coordinate i.
    for (Eigen::Index a = 0; a < m; ++a) {
      const double za = w[(p - 1 - a / d) * d + (a % d)];
      for (Eigen::Index b2 = 0; b2 < m; ++b2) {
        const double zb = w[(p - 1 - b2 / d) * d + (b2 % d)];
        acc.add(static_cast<std::size_t>(a * m + b2), za * zb);
      }
    }
    ++acc.centers;
  }
};

template <bool Exact>
struct ResidualCovKernel {
  Eigen::Index d;
  int p;
  const std::vector<Matrix>* ar;

  std::int64_t half_width() const { return p; }
  CenterPolicy policy() const { return CenterPolicy::backward; }
  void accumulate(const PartitionView& v, std::int64_t t, Lanes<Exact>& acc) const {
    const double* w = v.window(t - p, t + 1);
    if (!w) return;
    const Vector r = residual_at(w, p, d, *ar);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        acc.add(static_cast<std::size_t>(i * d + j), r(i) * r(j));
    ++acc.centers;
  }
};

template <bool Exact, class Kernel>
Lanes<Exact> run(const std::vector<Partition>& parts, const Kernel& kernel, std::size_t width,
                 const EngineOptions& opt) {
  return map_reduce(parts, kernel, LanesMonoid<Exact>{width}, opt);
}

int order_of(const std::vector<Matrix>& ar) { return static_cast<int>(ar.size()); }

double loglik_impl(const std::vector<Partition>& parts, const std::vector<Matrix>& ar,
                   const NoisePrecision& noise, const EngineOptions& opt) {
  const Eigen::Index d = parts.front().dim;
  const int p = order_of(ar);
  if (opt.deterministic) {
    auto acc = run<true>(parts, LoglikKernel<true>{d, p, &ar, &noise}, 1, opt);
    return acc.value(0);
  }
  auto acc = run<false>(parts, LoglikKernel<false>{d, p, &ar, &noise}, 1, opt);
  return acc.value(0);
}

std::vector<Matrix> grad_impl(const std::vector<Partition>& parts, const std::vector<Matrix>& ar,
                              const NoisePrecision& noise, const EngineOptions& opt) {
  const Eigen::Index d = parts.front().dim;
  const int p = order_of(ar);
  const std::size_t width = static_cast<std::size_t>(p) * d * d;
  std::vector<Matrix> grad(static_cast<std::size_t>(p), Matrix::Zero(d, d));
  auto fill = [&](auto acc) {
    for (int k = 0; k < p; ++k)
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          grad[static_cast<std::size_t>(k)](i, j) =
              acc.value(static_cast<std::size_t>(k) * d * d + static_cast<std::size_t>(i * d + j));
  };
  if (opt.deterministic)
    fill(run<true>(parts, GradKernel<true>{d, p, &ar, &noise}, width, opt));
  else
    fill(run<false>(parts, GradKernel<false>{d, p, &ar, &noise}, width, opt));
  return grad;
}

}  // namespace

StepRule StepRule::fixed(double eta) {
  StepRule r;
  r.kind = Kind::fixed;
  r.eta = eta;
  return r;
}

StepRule StepRule::eigen() {
  StepRule r;
  r.kind = Kind::eigen_two_over_m_plus_L;
  return r;
}

StepRule StepRule::backtracking(double c, double shrink) {
  StepRule r;
  r.kind = Kind::backtracking;
  r.c = c;
  r.shrink = shrink;
  return r;
}

void MleOptions::validate() const {
  if (max_iters < 1) throw DomainError("MleOptions: max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw DomainError("MleOptions: grad_tol must be > 0");
  if (step.kind == StepRule::Kind::fixed && !(step.eta > 0.0))
    throw DomainError("MleOptions: fixed step must be > 0");
  if (step.kind == StepRule::Kind::backtracking &&
      !(step.c > 0.0 && step.c < 1.0 && step.shrink > 0.0 && step.shrink < 1.0))
    throw DomainError("MleOptions: backtracking constants must lie in (0, 1)");
  if (rounds < 1) throw DomainError("MleOptions: rounds must be >= 1");
}

double conditional_loglik(const std::vector<Partition>& parts, const std::vector<Matrix>& ar,
                          const Matrix& sigma_eps, const EngineOptions& opt) {
  if (parts.front().n <= order_of(ar))
    throw DomainError("conditional_loglik: need n > p");
  return loglik_impl(parts, ar, precision_of(sigma_eps), opt);
}

double conditional_loglik(const RegularSeries& series, const std::vector<Matrix>& ar,
                          const Matrix& sigma_eps, const OverlapLayout& layout,
                          const EngineOptions& opt) {
  return conditional_loglik(make_partitions(series, layout), ar, sigma_eps, opt);
}

std::vector<Matrix> conditional_loglik_grad(const std::vector<Partition>& parts,
                                            const std::vector<Matrix>& ar, const Matrix& sigma_eps,
                                            const EngineOptions& opt) {
  if (parts.front().n <= order_of(ar))
    throw DomainError("conditional_loglik_grad: need n > p");
  return grad_impl(parts, ar, precision_of(sigma_eps), opt);
}

std::vector<Matrix> conditional_loglik_grad(const RegularSeries& series,
                                            const std::vector<Matrix>& ar, const Matrix& sigma_eps,
                                            const OverlapLayout& layout, const EngineOptions& opt) {
  return conditional_loglik_grad(make_partitions(series, layout), ar, sigma_eps, opt);
}

double two_over_m_plus_L(double hessian_spectrum_min, double hessian_spectrum_max) {
  if (!(hessian_spectrum_min > 0.0))
    throw DomainError(
        "two_over_m_plus_L: Hessian minimum must be positive (objective not strongly "
        "concave); add a ridge or use backtracking");
  if (hessian_spectrum_max < hessian_spectrum_min)
    throw DomainError("two_over_m_plus_L: need m <= L");
  return 2.0 / (hessian_spectrum_min + hessian_spectrum_max);
}

namespace detail {

AscentResult gradient_ascent(const AscentProblem& problem, Vector x0, const MleOptions& opts,
                             double step_m, double step_L) {
  opts.validate();
  Vector x = std::move(x0);
  double eta = opts.step.eta;
  if (opts.step.kind == StepRule::Kind::eigen_two_over_m_plus_L)
    eta = two_over_m_plus_L(step_m, step_L);

  double previous_objective = -std::numeric_limits<double>::infinity();
  bool have_previous = false;
  int decreases_in_a_row = 0;

  AscentResult out;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Vector g = problem.gradient(x);
    if (g.cwiseAbs().maxCoeff() < opts.grad_tol) {
      out.converged = true;
      out.iters = iter;
      break;
    }
    if (opts.step.kind == StepRule::Kind::backtracking) {
      const double base = problem.objective(x);
      const double g2 = g.squaredNorm();
      double trial = eta > 0 ? eta : 1.0;
      // Armijo: accept when the ascent gain beats c * eta * |g|^2.
      while (problem.objective(x + trial * g) < base + opts.step.c * trial * g2) {
        trial *= opts.step.shrink;
        if (trial < 1e-300)
          throw NumericalError("gradient_ascent: backtracking step underflow");
      }
      x += trial * g;
    } else {
      x += eta * g;
      if (problem.objective) {
        const double value = problem.objective(x);
        if (have_previous && value < previous_objective) {
          if (++decreases_in_a_row >= 5)
            throw NumericalError(
                "gradient_ascent: objective decreased five consecutive steps under a "
                "fixed step size; use backtracking or a smaller step");
        } else {
          decreases_in_a_row = 0;
        }
        previous_objective = value;
        have_previous = true;
      }
    }
    if (problem.on_iterate) problem.on_iterate(iter, x);
    out.iters = iter + 1;
  }
  out.x = std::move(x);
  return out;
}

}  // namespace detail

namespace {

std::vector<Matrix> unflatten(const Vector& x, int p, Eigen::Index d) {
  std::vector<Matrix> ar(static_cast<std::size_t>(p), Matrix(d, d));
  for (int k = 0; k < p; ++k)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        ar[static_cast<std::size_t>(k)](i, j) = x(k * d * d + i * d + j);
  return ar;
}

Vector flatten(const std::vector<Matrix>& ar, Eigen::Index d) {
  const int p = static_cast<int>(ar.size());
  Vector x(static_cast<Eigen::Index>(p) * d * d);
  for (int k = 0; k < p; ++k)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        x(k * d * d + i * d + j) = ar[static_cast<std::size_t>(k)](i, j);
  return x;
}

Matrix residual_covariance(const std::vector<Partition>& parts, const std::vector<Matrix>& ar,
                           const EngineOptions& opt) {
  const Eigen::Index d = parts.front().dim;
  const int p = order_of(ar);
  const std::size_t width = static_cast<std::size_t>(d) * d;
  Matrix sigma(d, d);
  auto fill = [&](auto acc) {
    const double norm = static_cast<double>(acc.centers);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        sigma(i, j) = acc.value(static_cast<std::size_t>(i * d + j)) / norm;
  };
  if (opt.deterministic)
    fill(run<true>(parts, ResidualCovKernel<true>{d, p, &ar}, width, opt));
  else
    fill(run<false>(parts, ResidualCovKernel<false>{d, p, &ar}, width, opt));
  return 0.5 * (sigma + sigma.transpose());
}

// Extreme eigenvalues of the ascent Hessian Pi (x) S for the eigen step rule.
std::pair<double, double> hessian_extremes(const std::vector<Partition>& parts, int p,
                                           const Matrix& pi, const EngineOptions& opt) {
  const Eigen::Index d = parts.front().dim;
  const Eigen::Index m = static_cast<Eigen::Index>(p) * d;
  Matrix s(m, m);
  auto fill = [&](auto acc) {
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b2 = 0; b2 < m; ++b2)
        s(a, b2) = acc.value(static_cast<std::size_t>(a * m + b2));
  };
  if (opt.deterministic)
    fill(run<true>(parts, LagMomentKernel<true>{d, p}, static_cast<std::size_t>(m * m), opt));
  else
    fill(run<false>(parts, LagMomentKernel<false>{d, p}, static_cast<std::size_t>(m * m), opt));
  s = 0.5 * (s + s.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es_s(s, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Matrix> es_pi(pi, Eigen::EigenvaluesOnly);
  if (es_s.info() != Eigen::Success || es_pi.info() != Eigen::Success)
    throw NumericalError("fit_ar_mle: eigensolve for the step size failed");
  // Kronecker spectrum: products of the two spectra.
  const double lo = es_pi.eigenvalues().minCoeff() * es_s.eigenvalues().minCoeff();
  const double hi = es_pi.eigenvalues().maxCoeff() * es_s.eigenvalues().maxCoeff();
  return {lo, hi};
}

std::vector<Matrix> sgd_fit(const RegularSeries& series, int p, const NoisePrecision& noise,
                            const MleOptions& opts, std::vector<Matrix> ar) {
  const Eigen::Index d = series.d();
  const std::int64_t n = series.n();
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::int64_t> pick(p, n - 1);
  const double* base = series.values.data();
  for (int step = 0; step < opts.max_iters; ++step) {
    const std::int64_t t = pick(rng);
    const double* w = base + (t - p) * d;
    const Vector g = noise.pi * residual_at(w, p, d, ar);
    const double eta = opts.sgd_step0 / (1.0 + static_cast<double>(step));
    for (int k = 1; k <= p; ++k) {
      const auto lag = Eigen::Map<const Vector>(w + static_cast<std::size_t>(p - k) * d, d);
      ar[static_cast<std::size_t>(k - 1)].noalias() += eta * g * lag.transpose();
    }
  }
  return ar;
}

}  // namespace

FittedModel fit_ar_mle(const RegularSeries& series, int p, std::optional<Matrix> sigma_eps,
                       const MleOptions& opts, const OverlapLayout& layout,
                       const EngineOptions& engine) {
  opts.validate();
  series.validate();
  if (p < 1) throw DomainError("fit_ar_mle: p must be >= 1");
  if (series.n() <= p) throw DomainError("fit_ar_mle: need n > p");
  const Eigen::Index d = series.d();
  if (sigma_eps && (sigma_eps->rows() != d || sigma_eps->cols() != d))
    throw DomainError("fit_ar_mle: sigma_eps dimension mismatch");

  const auto parts = make_partitions(series, layout);
  const bool sigma_known = sigma_eps.has_value();
  Matrix sigma = sigma_known ? *sigma_eps : Matrix::Identity(d, d);
  const int rounds = sigma_known ? 1 : opts.rounds;

  std::vector<Matrix> ar(static_cast<std::size_t>(p), Matrix::Zero(d, d));
  if (opts.init == MleOptions::Init::yule_walker_warm_start) {
    const auto cov = autocovariance_per_lag(series, make_layout(series.n(), 1, p), p, engine);
    ar = fit_ar_yule_walker(cov, p).model.ar;
  }

  FittedModel fit;
  fit.method = "mle";
  bool converged = false;
  for (int round = 0; round < rounds; ++round) {
    const NoisePrecision noise = precision_of(sigma);
    if (opts.sgd) {
      ar = sgd_fit(series, p, noise, opts, std::move(ar));
      converged = true;
    } else {
      double lo = 0.0, hi = 0.0;
      if (opts.step.kind == StepRule::Kind::eigen_two_over_m_plus_L ||
          opts.step.kind == StepRule::Kind::backtracking) {
        std::tie(lo, hi) = hessian_extremes(parts, p, noise.pi, engine);
        if (opts.step.kind == StepRule::Kind::eigen_two_over_m_plus_L && !(lo > 0.0))
          throw DomainError(
              "fit_ar_mle: lag moment matrix is not positive definite; the objective is "
              "not strongly concave. Add a ridge or use backtracking");
      }
      detail::AscentProblem problem;
      problem.objective = [&](const Vector& x) {
        return loglik_impl(parts, unflatten(x, p, d), noise, engine);
      };
      problem.gradient = [&](const Vector& x) {
        return flatten(grad_impl(parts, unflatten(x, p, d), noise, engine), d);
      };
      MleOptions step_opts = opts;
      if (opts.step.kind == StepRule::Kind::backtracking && hi > 0.0)
        step_opts.step.eta = 2.0 / (lo > 0 ? lo + hi : hi);
      auto result = detail::gradient_ascent(problem, flatten(ar, d), step_opts, lo, hi);
      ar = unflatten(result.x, p, d);
      converged = result.converged;
    }
    if (!sigma_known) sigma = residual_covariance(parts, ar, engine);
  }

  fit.model.d = d;
  fit.model.ar = std::move(ar);
  fit.model.sigma_eps = std::move(sigma);  // residual covariance when it was unknown
  fit.converged = converged;
  if (!converged) fit.warnings.push_back("not_converged");
  if (!is_causal(fit.model)) fit.warnings.push_back("non_causal");
  return fit;
}

FittedModel fit_ar_mle(const RegularSeries& series, int p, std::optional<Matrix> sigma_eps,
                       const MleOptions& opts) {
  return fit_ar_mle(series, p, std::move(sigma_eps), opts,
                    make_layout(series.n(), 1, p));
}

}  // namespace tsfit
