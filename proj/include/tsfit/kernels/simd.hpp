#pragma once

#include <cstdint>

#include "tsfit/exact_sum.hpp"

// Hot inner loops behind the estimators, in scalar reference form and an
// AVX2 variant selected at runtime. The exact kernels are grouping-invariant
// (they feed ExactSum lanes through error-free transforms), so scalar and
// AVX2 agree bit-for-bit; the fast kernels reassociate and are only required
// to agree within rounding tolerance.
namespace tsfit::simd {

enum class Isa { scalar, avx2 };

// ISA chosen from TSFIT_SIMD (scalar|avx2|auto) and CPU detection.
Isa active_isa();
// Forces an ISA (tests; throws DomainError if unsupported by the CPU).
void set_isa(Isa isa);
const char* isa_name(Isa isa);

namespace detail {

// out[l] += sum_{t in [t0, t1)} x[t] * x[t + lags[l]]  (plain doubles)
using LagProductsFastFn = void (*)(const double* x, std::int64_t t0, std::int64_t t1,
                                   const int* lags, int num_lags, double* out);
// Same sums deposited exactly into per-lag ExactSum lanes.
using LagProductsExactFn = void (*)(const double* x, std::int64_t t0, std::int64_t t1,
                                    const int* lags, int num_lags, ExactSum* lanes);
// y[i] = sum_{k=-b..b, 0<=i+k<d} diags[(k+b)*d + i] * x[i+k]
using BandedMatvecFn = void (*)(const double* diags, int d, int b, const double* x, double* y);

struct KernelTable {
  LagProductsFastFn lag_products_fast;
  LagProductsExactFn lag_products_exact;
  BandedMatvecFn banded_matvec;
};

extern const KernelTable scalar_table;
extern const KernelTable avx2_table;
const KernelTable& active_table();

}  // namespace detail

// Sliding lag products over a univariate series. Caller guarantees that
// t + lags[l] stays inside the array for every admitted t.
inline void lag_products_fast(const double* x, std::int64_t t0, std::int64_t t1, const int* lags,
                              int num_lags, double* out) {
  detail::active_table().lag_products_fast(x, t0, t1, lags, num_lags, out);
}

inline void lag_products_exact(const double* x, std::int64_t t0, std::int64_t t1, const int* lags,
                               int num_lags, ExactSum* lanes) {
  detail::active_table().lag_products_exact(x, t0, t1, lags, num_lags, lanes);
}

// Banded matrix-vector product in diagonal storage: diags holds 2b+1 rows of
// length d, row k+b being the k-th diagonal (entry i multiplies x[i+k]).
// Scalar and AVX2 variants are bit-identical (same per-element operation
// order, no FMA contraction).
inline void banded_matvec(const double* diags, int d, int b, const double* x, double* y) {
  detail::active_table().banded_matvec(diags, d, b, x, y);
}

}  // namespace tsfit::simd
