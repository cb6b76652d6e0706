// Scalar reference kernels. Compiled with -ffp-contract=off so the banded
// matvec stays bit-comparable with the non-FMA AVX2 variant.

#include "tsfit/kernels/simd.hpp"

namespace tsfit::simd::detail {

namespace {

void lag_products_fast_scalar(const double* x, std::int64_t t0, std::int64_t t1, const int* lags,
                              int num_lags, double* out) {
  for (int l = 0; l < num_lags; ++l) {
    const double* shifted = x + lags[l];
    double acc = 0.0;
    for (std::int64_t t = t0; t < t1; ++t) acc += x[t] * shifted[t];
    out[l] += acc;
  }
}

void lag_products_exact_scalar(const double* x, std::int64_t t0, std::int64_t t1, const int* lags,
                               int num_lags, ExactSum* lanes) {
  for (int l = 0; l < num_lags; ++l) {
    const double* shifted = x + lags[l];
    ExactSum& lane = lanes[l];
    for (std::int64_t t = t0; t < t1; ++t) lane.add(x[t] * shifted[t]);
  }
}

void banded_matvec_scalar(const double* diags, int d, int b, const double* x, double* y) {
  for (int i = 0; i < d; ++i) y[i] = 0.0;
  for (int k = -b; k <= b; ++k) {
    const double* diag = diags + static_cast<std::size_t>(k + b) * d;
    const int i0 = k < 0 ? -k : 0;
    const int i1 = k > 0 ? d - k : d;
    for (int i = i0; i < i1; ++i) y[i] += diag[i] * x[i + k];
  }
}

}  // namespace

const KernelTable scalar_table = {
    lag_products_fast_scalar,
    lag_products_exact_scalar,
    banded_matvec_scalar,
};

}  // namespace tsfit::simd::detail
