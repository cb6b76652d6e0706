// AVX2 kernel variants. Compiled with -mavx2 -mfma -ffp-contract=off: FMA is
// used only where written explicitly (the reassociating fast path), never by
// contraction, so the banded matvec stays bit-identical with the scalar
// reference.
//
// The exact lag-product path keeps four independent floating-point-expansion
// chains per lane (one per SIMD slot) built from error-free TwoSum steps;
// residues that escape the expansion spill into an ExactSum. Every transform
// is exact, so the accumulated value -- and hence the rounded result -- is
// bit-identical to the scalar reference.

#include "tsfit/kernels/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace tsfit::simd::detail {

namespace {

// Knuth TwoSum: s = fl(a + b), returns the exact residue; no branch.
inline __m256d two_sum(__m256d a, __m256d b, __m256d& s) {
  s = _mm256_add_pd(a, b);
  const __m256d bv = _mm256_sub_pd(s, a);
  const __m256d av = _mm256_sub_pd(s, bv);
  const __m256d err_b = _mm256_sub_pd(b, bv);
  const __m256d err_a = _mm256_sub_pd(a, av);
  return _mm256_add_pd(err_a, err_b);
}

void lag_products_fast_avx2(const double* x, std::int64_t t0, std::int64_t t1, const int* lags,
                            int num_lags, double* out) {
  for (int l = 0; l < num_lags; ++l) {
    const double* shifted = x + lags[l];
    __m256d acc = _mm256_setzero_pd();
    std::int64_t t = t0;
    for (; t + 4 <= t1; t += 4) {
      const __m256d a = _mm256_loadu_pd(x + t);
      const __m256d b = _mm256_loadu_pd(shifted + t);
      acc = _mm256_fmadd_pd(a, b, acc);
    }
    alignas(32) double lanes4[4];
    _mm256_store_pd(lanes4, acc);
    double sum = (lanes4[0] + lanes4[1]) + (lanes4[2] + lanes4[3]);
    for (; t < t1; ++t) sum += x[t] * shifted[t];
    out[l] += sum;
  }
}

void lag_products_exact_avx2(const double* x, std::int64_t t0, std::int64_t t1, const int* lags,
                             int num_lags, ExactSum* lanes) {
  const __m256d zero = _mm256_setzero_pd();
  for (int l = 0; l < num_lags; ++l) {
    const double* shifted = x + lags[l];
    ExactSum spill;
    __m256d s0 = zero, s1 = zero, s2 = zero;
    std::int64_t t = t0;
    for (; t + 4 <= t1; t += 4) {
      const __m256d a = _mm256_loadu_pd(x + t);
      const __m256d b = _mm256_loadu_pd(shifted + t);
      __m256d r = _mm256_mul_pd(a, b);
      r = two_sum(s0, r, s0);
      r = two_sum(s1, r, s1);
      r = two_sum(s2, r, s2);
      const __m256d escaped = _mm256_cmp_pd(r, zero, _CMP_NEQ_UQ);
      if (_mm256_movemask_pd(escaped) != 0) {
        alignas(32) double res[4];
        _mm256_store_pd(res, r);
        for (double v : res)
          if (v != 0.0) spill.add(v);
      }
    }
    for (; t < t1; ++t) spill.add(x[t] * shifted[t]);
    alignas(32) double slot[4];
    for (const __m256d s : {s0, s1, s2}) {
      _mm256_store_pd(slot, s);
      for (double v : slot)
        if (v != 0.0) spill.add(v);
    }
    lanes[l].merge(spill);
  }
}

void banded_matvec_avx2(const double* diags, int d, int b, const double* x, double* y) {
  for (int i = 0; i < d; ++i) y[i] = 0.0;
  for (int k = -b; k <= b; ++k) {
    const double* diag = diags + static_cast<std::size_t>(k + b) * d;
    const int i0 = k < 0 ? -k : 0;
    const int i1 = k > 0 ? d - k : d;
    int i = i0;
    for (; i + 4 <= i1; i += 4) {
      const __m256d dv = _mm256_loadu_pd(diag + i);
      const __m256d xv = _mm256_loadu_pd(x + i + k);
      const __m256d yv = _mm256_loadu_pd(y + i);
      _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(dv, xv)));
    }
    for (; i < i1; ++i) y[i] += diag[i] * x[i + k];
  }
}

}  // namespace

const KernelTable avx2_table = {
    lag_products_fast_avx2,
    lag_products_exact_avx2,
    banded_matvec_avx2,
};

}  // namespace tsfit::simd::detail

#else  // non-x86 fallback: the AVX2 table aliases the scalar reference

namespace tsfit::simd::detail {
const KernelTable avx2_table = scalar_table;
}  // namespace tsfit::simd::detail

#endif
