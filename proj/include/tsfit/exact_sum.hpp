#pragma once

#include <array>
#include <cstdint>

namespace tsfit {

// Exact accumulator for sums of IEEE-754 doubles.
//
// The running sum is held as a wide fixed-point integer (base-2^32 limbs
// stored in int64 so carries stay implicit between squeezes). Deposits and
// merges are exact integer operations, hence associative and commutative:
// the rounded result is independent of evaluation order and of how the
// addends were grouped across partitions. This is what makes deterministic
// map-reduce results bit-identical for any partition count.
//
// round() canonicalizes the limbs (a pure function of the exact value) and
// assembles the nearest double from the leading 128 bits, so equal exact
// values always round to the same bits.
//
// Operating envelope: finite addends only (non-finite throws), up to ~2^62
// deposits. Values whose exact sum falls below ~2^-1056 may round with a
// one-ulp slack in the subnormal assembly; the result is still a pure
// function of the exact value.
class ExactSum {
 public:
  ExactSum() = default;

  // Adds one finite double, exactly.
  void add(double x);

  // Adds another accumulator's exact value, exactly.
  void merge(const ExactSum& other);

  // Nearest double of the exact accumulated value.
  double round() const;

  void reset();

  bool operator==(const ExactSum& other) const;

 private:
  static constexpr int kLimbBits = 32;
  static constexpr int kLimbCount = 70;
  // Bit 0 of limb 0 weighs 2^-kExpOffset; covers subnormals (2^-1074)
  // through sums far above the largest double.
  static constexpr int kExpOffset = 1088;
  static constexpr std::int64_t kSqueezeEvery = std::int64_t{1} << 29;

  void squeeze();

  std::array<std::int64_t, kLimbCount> limb_{};
  std::int64_t pending_ = 0;  // bound on per-limb magnitude in 2^32 units
};

}  // namespace tsfit
