#pragma once

#include <cstdint>
#include <vector>

#include "tsfit/exact_sum.hpp"

namespace tsfit {

// A fixed set of scalar reduction lanes plus an admitted-center count; the
// accumulator shape shared by every estimator kernel. Exact lanes make the
// reduction grouping-invariant (deterministic mode); plain lanes reassociate
// (fast mode).
template <bool Exact>
struct Lanes;

template <>
struct Lanes<true> {
  std::vector<ExactSum> lane;
  std::int64_t centers = 0;

  explicit Lanes(std::size_t n = 0) : lane(n) {}
  void add(std::size_t i, double x) { lane[i].add(x); }
  void merge(Lanes&& o) {
    for (std::size_t i = 0; i < lane.size(); ++i) lane[i].merge(o.lane[i]);
    centers += o.centers;
  }
  double value(std::size_t i) const { return lane[i].round(); }
};

template <>
struct Lanes<false> {
  std::vector<double> lane;
  std::int64_t centers = 0;

  explicit Lanes(std::size_t n = 0) : lane(n, 0.0) {}
  void add(std::size_t i, double x) { lane[i] += x; }
  void merge(Lanes&& o) {
    for (std::size_t i = 0; i < lane.size(); ++i) lane[i] += o.lane[i];
    centers += o.centers;
  }
  double value(std::size_t i) const { return lane[i]; }
};

template <bool Exact>
struct LanesMonoid {
  std::size_t width;

  Lanes<Exact> identity() const { return Lanes<Exact>(width); }
  void combine(Lanes<Exact>& into, Lanes<Exact>&& from) const { into.merge(std::move(from)); }
};

}  // namespace tsfit
