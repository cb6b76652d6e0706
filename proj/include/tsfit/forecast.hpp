#pragma once

#include <string>
#include <vector>

#include "tsfit/model.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

struct ForecastResult {
  RowMatrix predictions;        // horizon x d
  RowMatrix one_step_residuals; // (n - warmup) x d for the ARMA path; empty otherwise
  std::vector<std::string> warnings;
};

// Recursive AR predictor: X_hat_{t+1} = A_1 X_t + ... + A_p X_{t-p+1};
// further steps re-inject predictions. `recent` holds exactly the last p
// observations in time order (row 0 oldest).
ForecastResult forecast_ar(const ArmaModel& model, const RowMatrix& recent, int horizon);

// Streaming one-step ARMA predictor:
//   X_hat_t = sum_k A_k X_{t-k} + sum_j B_j (X_{t-j} - X_hat_{t-j})
// after a warmup of max(p, q) steps. By default the warmup predictions are
// zero and initialization error is forgotten geometrically; with
// exact_warmup the finite-sample innovation weights from the model's own
// autocovariance are used instead. Emits every one-step prediction's
// residual, then `horizon` re-injected forecasts past the end (future
// innovations set to zero).
ForecastResult forecast_arma_one_step(const ArmaModel& model, const RegularSeries& series,
                                      int horizon = 1, bool exact_warmup = false);

// Chunked approximate variant over the overlap engine: each chunk restarts
// the recursion from a zero state at the left edge of its padded range, so
// owned outputs carry an O(rho^padding) boundary error for stable models.
ForecastResult forecast_arma_one_step_chunked(const ArmaModel& model, const RegularSeries& series,
                                              int num_chunks, std::int64_t padding,
                                              int threads = 0);

}  // namespace tsfit
