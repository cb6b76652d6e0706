#include "tsfit/forecast.hpp"

#include <algorithm>

#include "tsfit/errors.hpp"
#include "tsfit/fit_freq.hpp"
#include "tsfit/overlap.hpp"

namespace tsfit {

namespace {

void stability_warnings(const ArmaModel& model, std::vector<std::string>& warnings) {
  if (!is_causal(model)) warnings.push_back("non_causal");
  if (!is_invertible(model)) warnings.push_back("non_invertible");
}

// Streaming one-step recursion with O(max(p,q)) state. Rows are consumed in
// time order; emit() receives (local index, prediction of that row) before
// the row enters the history.
class OneStepStream {
 public:
  OneStepStream(const ArmaModel& model, const InnovationState* warmup_weights)
      : model_(model),
        w_(std::max(model.p(), model.q())),
        warmup_weights_(warmup_weights),
        hist_x_(RowMatrix::Zero(std::max(w_, 1), model.d)),
        hist_res_(RowMatrix::Zero(std::max(w_, 1), model.d)) {}

  Vector predict_next() const {
    const Eigen::Index d = model_.d;
    Vector pred = Vector::Zero(d);
    if (seen_ < w_) {
      // Warmup: zero by default, innovation-weighted when weights were built.
      if (warmup_weights_ && seen_ >= 1) {
        const auto m = static_cast<int>(seen_);
        for (int j = 1; j <= m; ++j)
          pred += warmup_weights_->theta_at(m, j) * past_res(j);
      }
      return pred;
    }
    for (int k = 1; k <= model_.p(); ++k) pred += model_.ar[static_cast<std::size_t>(k - 1)] * past_x(k);
    for (int j = 1; j <= model_.q(); ++j) pred += model_.ma[static_cast<std::size_t>(j - 1)] * past_res(j);
    return pred;
  }

  // Feeds the observed row and its residual into the history.
  void push(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& residual) {
    if (w_ > 0) {
      hist_x_.row(slot(seen_)) = x.transpose();
      hist_res_.row(slot(seen_)) = residual.transpose();
    }
    ++seen_;
  }

  std::int64_t seen() const { return seen_; }

 private:
  Eigen::Index slot(std::int64_t t) const { return static_cast<Eigen::Index>(t % std::max(w_, 1)); }
  Vector past_x(int back) const { return hist_x_.row(slot(seen_ - back)).transpose(); }
  Vector past_res(int back) const { return hist_res_.row(slot(seen_ - back)).transpose(); }

  const ArmaModel& model_;
  int w_;
  const InnovationState* warmup_weights_;
  RowMatrix hist_x_, hist_res_;
  std::int64_t seen_ = 0;
};

}  // namespace

ForecastResult forecast_ar(const ArmaModel& model, const RowMatrix& recent, int horizon) {
  model.validate();
  if (model.q() != 0) throw DomainError("forecast_ar: model must have q = 0");
  if (horizon < 1) throw DomainError("forecast_ar: horizon must be >= 1");
  if (recent.rows() != model.p() || (model.p() > 0 && recent.cols() != model.d))
    throw DomainError("forecast_ar: `recent` must hold exactly the last p observations");

  ForecastResult out;
  stability_warnings(model, out.warnings);
  const Eigen::Index d = model.d;
  const int p = model.p();
  RowMatrix window(std::max(p, 1), d);
  if (p > 0) window = recent;
  out.predictions.resize(horizon, d);
  for (int s = 0; s < horizon; ++s) {
    Vector next = Vector::Zero(d);
    // row p-1 is the most recent observation (or re-injected prediction)
    for (int k = 1; k <= p; ++k) next += model.ar[static_cast<std::size_t>(k - 1)] * window.row(p - k).transpose();
    out.predictions.row(s) = next.transpose();
    if (p > 0) {
      for (int r = 0; r + 1 < p; ++r) window.row(r) = window.row(r + 1);
      window.row(p - 1) = next.transpose();
    }
  }
  return out;
}

ForecastResult forecast_arma_one_step(const ArmaModel& model, const RegularSeries& series,
                                      int horizon, bool exact_warmup) {
  model.validate();
  series.validate();
  if (horizon < 0) throw DomainError("forecast_arma_one_step: horizon must be >= 0");
  const int w = std::max(model.p(), model.q());
  if (series.n() <= w) throw DomainError("forecast_arma_one_step: need n > max(p, q)");

  ForecastResult out;
  stability_warnings(model, out.warnings);

  InnovationState warmup_state;
  const InnovationState* weights = nullptr;
  if (exact_warmup && w >= 2) {
    warmup_state = innovations(model_autocovariance(model, w), w - 1);
    weights = &warmup_state;
  }

  const Eigen::Index d = series.d();
  const std::int64_t n = series.n();
  OneStepStream stream(model, weights);
  out.one_step_residuals.resize(n - w, d);
  for (std::int64_t t = 0; t < n; ++t) {
    const Vector pred = stream.predict_next();
    const Vector x = series.values.row(t).transpose();
    const Vector residual = x - pred;
    if (t >= w) out.one_step_residuals.row(t - w) = residual.transpose();
    stream.push(x, residual);
  }
  // Re-injected forecasts past the end: future innovations are zero.
  out.predictions.resize(horizon, d);
  for (int s = 0; s < horizon; ++s) {
    const Vector pred = stream.predict_next();
    out.predictions.row(s) = pred.transpose();
    stream.push(pred, Vector::Zero(d));
  }
  return out;
}

ForecastResult forecast_arma_one_step_chunked(const ArmaModel& model, const RegularSeries& series,
                                              int num_chunks, std::int64_t padding, int threads) {
  model.validate();
  series.validate();
  const int w = std::max(model.p(), model.q());
  if (series.n() <= w) throw DomainError("forecast_arma_one_step_chunked: need n > max(p, q)");
  const auto layout = make_layout(series.n(), num_chunks, padding);

  ForecastResult out;
  stability_warnings(model, out.warnings);
  const Eigen::Index d = series.d();
  const std::int64_t n = series.n();
  out.one_step_residuals.resize(n - w, d);

  detail::run_over_partitions(num_chunks, threads, [&](int i) {
    const auto [own_begin, own_end] = layout.owned(i);
    const auto [pad_begin, pad_end] = layout.padded(i);
    OneStepStream stream(model, nullptr);
    for (std::int64_t t = pad_begin; t < std::min(pad_end, own_end); ++t) {
      const Vector pred = stream.predict_next();
      const Vector x = series.values.row(t).transpose();
      if (t >= own_begin && t >= w)
        out.one_step_residuals.row(t - w) = (x - pred).transpose();
      stream.push(x, x - pred);
    }
  });
  out.predictions.resize(0, d);
  return out;
}

}  // namespace tsfit
