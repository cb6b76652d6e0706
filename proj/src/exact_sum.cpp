#include "tsfit/exact_sum.hpp"

#include <bit>
#include <cmath>

#include "tsfit/errors.hpp"

namespace tsfit {

namespace {

constexpr std::int64_t kDigitMask = 0xFFFFFFFFll;

// TwoSum-style accumulation of `x` into the double-double (hi, lo).
inline void dd_add(double& hi, double& lo, double x) {
  const double s = hi + x;
  const double b = s - hi;
  const double err = (hi - (s - b)) + (x - b);
  hi = s;
  lo += err;
}

}  // namespace

void ExactSum::add(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t exp_field = (bits >> 52) & 0x7FF;
  std::uint64_t mant = bits & 0xFFFFFFFFFFFFFull;
  if (exp_field == 0x7FF) throw DomainError("ExactSum: non-finite addend");
  int lsb_exp;
  if (exp_field == 0) {
    if (mant == 0) return;  // +-0 contributes nothing
    lsb_exp = -1074;
  } else {
    mant |= std::uint64_t{1} << 52;
    lsb_exp = static_cast<int>(exp_field) - 1023 - 52;
  }
  const int pos = lsb_exp + kExpOffset;  // >= 14 by construction
  const int q = pos >> 5;
  const int r = pos & 31;
  const unsigned __int128 wide = static_cast<unsigned __int128>(mant) << r;
  const auto w0 = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide) & kDigitMask);
  const auto w1 = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide >> 32) & kDigitMask);
  const auto w2 = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide >> 64));
  if (bits >> 63) {
    limb_[q] -= w0;
    limb_[q + 1] -= w1;
    limb_[q + 2] -= w2;
  } else {
    limb_[q] += w0;
    limb_[q + 1] += w1;
    limb_[q + 2] += w2;
  }
  if (++pending_ >= kSqueezeEvery) squeeze();
}

void ExactSum::merge(const ExactSum& other) {
  for (int i = 0; i < kLimbCount; ++i) limb_[i] += other.limb_[i];
  pending_ += other.pending_ + 1;
  if (pending_ >= kSqueezeEvery) squeeze();
}

void ExactSum::squeeze() {
  // Floored carry propagation: every limb but the top ends in [0, 2^32).
  // The top limb keeps the (signed) overflow, which cannot leave int64 for
  // any sum reachable from finite doubles within the operating envelope.
  std::int64_t carry = 0;
  for (int i = 0; i < kLimbCount - 1; ++i) {
    const std::int64_t v = limb_[i] + carry;
    const std::int64_t digit = v & kDigitMask;
    carry = (v - digit) >> kLimbBits;
    limb_[i] = digit;
  }
  limb_[kLimbCount - 1] += carry;  // top limb keeps the signed remainder
  pending_ = 1;
}

double ExactSum::round() const {
  ExactSum c = *this;
  c.squeeze();
  int top = kLimbCount - 1;
  while (top >= 0 && c.limb_[top] == 0) --top;
  if (top < 0) return 0.0;
  double sign = 1.0;
  if (c.limb_[top] < 0) {
    // Negative total: negate every limb (value -> -value, exactly) and
    // re-canonicalize so the digits describe the magnitude.
    sign = -1.0;
    for (auto& v : c.limb_) v = -v;
    c.squeeze();
    top = kLimbCount - 1;
    while (top >= 0 && c.limb_[top] == 0) --top;
    if (top < 0) return 0.0;
  }
  double hi = 0.0;
  double lo = 0.0;
  for (int i = top; i >= 0 && i > top - 4; --i) {
    const double term =
        std::ldexp(static_cast<double>(c.limb_[i]), kLimbBits * i - kExpOffset);
    dd_add(hi, lo, term);
  }
  return sign * (hi + lo);
}

void ExactSum::reset() {
  limb_.fill(0);
  pending_ = 0;
}

bool ExactSum::operator==(const ExactSum& other) const {
  ExactSum a = *this;
  ExactSum b = other;
  a.squeeze();
  b.squeeze();
  return a.limb_ == b.limb_;
}

}  // namespace tsfit
