#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <utility>
#include <vector>

#include "tsfit/errors.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

// Execution knobs for map_reduce.
struct EngineOptions {
  int threads = 0;            // 0 = hardware concurrency
  bool deterministic = true;  // grouping-invariant accumulation, ordered combine
  // The weak-memory contract half_width <= padding is checked unless a test
  // disables it to observe refused cross-partition reads.
  bool enforce_weak_memory = true;
};

// Near-equal contiguous split of [0, n) into k blocks, remainder spread over
// the leading blocks. Shared by the time axis and the spatial (dimension)
// axis of the banded fit.
std::vector<std::pair<std::int64_t, std::int64_t>> split_ranges(std::int64_t n, int k);

// Owned/padded range arithmetic of the overlapping partitioning.
struct OverlapLayout {
  std::int64_t n = 0;
  int num_partitions = 1;
  std::int64_t padding = 0;  // H, in steps

  std::pair<std::int64_t, std::int64_t> owned(int i) const;
  std::pair<std::int64_t, std::int64_t> padded(int i) const;
};

OverlapLayout make_layout(std::int64_t n, int num_partitions, std::int64_t padding);

// One partition: an owned time range plus H-step replicated padding, holding
// a local copy of the series rows over the padded range. Immutable after
// construction; the counters are only touched by the single worker that owns
// the partition during a map phase.
struct Partition {
  int id = 0;
  std::int64_t n = 0;        // global series length
  std::int64_t padding = 0;  // layout padding
  std::int64_t own_begin = 0, own_end = 0;
  std::int64_t pad_begin = 0, pad_end = 0;
  Eigen::Index dim = 0;
  RowMatrix data;  // rows [pad_begin, pad_end) of the global series

  mutable std::int64_t refused_reads = 0;
  mutable std::int64_t kernel_evals = 0;
};

// Splits the series into k partitions with the given padding.
std::vector<Partition> make_partitions(const RegularSeries& series, int k, std::int64_t padding);
std::vector<Partition> make_partitions(const RegularSeries& series, const OverlapLayout& layout);

// Total refused out-of-padded-range reads across the partitions. Refused
// reads are counted, never served: a nonzero count means an estimator needed
// data its padding does not replicate.
std::int64_t communication_counter(const std::vector<Partition>& parts);
void reset_communication_counter(const std::vector<Partition>& parts);

// Total kernel evaluations across the partitions (one per admitted center).
std::int64_t evaluation_count(const std::vector<Partition>& parts);

// The local window a kernel is allowed to read: only rows replicated in the
// partition's padded range are served; anything else is refused and counted.
class PartitionView {
 public:
  explicit PartitionView(const Partition& part) : part_(&part) {}

  std::int64_t n() const { return part_->n; }
  Eigen::Index dim() const { return part_->dim; }

  // Pointer to global row t0 of the contiguous rows [t0, t1), or nullptr
  // (counted) if the span is not fully held locally. Row stride is dim().
  const double* window(std::int64_t t0, std::int64_t t1) const {
    if (t0 < part_->pad_begin || t1 > part_->pad_end || t0 > t1) {
      ++part_->refused_reads;
      return nullptr;
    }
    return part_->data.data() + (t0 - part_->pad_begin) * part_->dim;
  }

  const double* row(std::int64_t t) const { return window(t, t + 1); }

 private:
  const Partition* part_;
};

// Which centers a width-2H kernel admits.
enum class CenterPolicy {
  interior_only,  // t in [H, n - H): both sides of the window in range
  forward,        // t in [0, n - H): forward-looking window [t, t + H]
  backward,       // t in [H, n): backward-looking window [t - H, t]
  clipped         // t in [0, n): window clipped to the series
};

std::pair<std::int64_t, std::int64_t> admitted_centers(CenterPolicy policy, std::int64_t n,
                                                       std::int64_t half_width);

namespace detail {

void run_over_partitions(int num_partitions, int threads,
                         const std::function<void(int)>& work);

}  // namespace detail

// Evaluates `kernel` at every admitted center of every partition's owned
// range using only locally held rows, then combines the per-partition
// accumulators with `monoid`.
//
// Kernel requirements:
//   int64_t half_width() const;
//   CenterPolicy policy() const;
//   void accumulate(const PartitionView&, int64_t t, Acc&) const;
// and optionally a batched form used when the weak-memory contract has been
// verified (windows can then never be refused):
//   void accumulate_range(const PartitionView&, int64_t t0, int64_t t1, Acc&) const;
//
// Monoid requirements: Acc identity() const; void combine(Acc&, Acc&&) const.
// combine must be associative with identity() as neutral element; for
// deterministic runs the per-partition results are folded in partition-id
// order (and centers are visited in ascending t), so a grouping-invariant
// accumulator yields bit-identical results for every partition count.
template <class Kernel, class Monoid>
auto map_reduce(const std::vector<Partition>& parts, const Kernel& kernel, const Monoid& monoid,
                const EngineOptions& opt = {}) {
  using Acc = decltype(monoid.identity());
  if (parts.empty()) throw DomainError("map_reduce: no partitions");
  const std::int64_t half_width = kernel.half_width();
  const std::int64_t n = parts.front().n;
  if (opt.enforce_weak_memory && half_width > parts.front().padding)
    throw ContractViolation(
        "map_reduce: kernel half_width exceeds layout padding; the estimator "
        "is not order-H weak-memory for this layout");
  const auto [lo, hi] = admitted_centers(kernel.policy(), n, half_width);

  const int k = static_cast<int>(parts.size());
  std::vector<Acc> results;
  results.reserve(k);
  for (int i = 0; i < k; ++i) results.push_back(monoid.identity());
  std::vector<int> completion_order;
  completion_order.reserve(k);
  std::mutex completion_mutex;

  detail::run_over_partitions(k, opt.threads, [&](int i) {
    const Partition& part = parts[static_cast<std::size_t>(i)];
    PartitionView view(part);
    const std::int64_t t0 = std::max(part.own_begin, lo);
    const std::int64_t t1 = std::min(part.own_end, hi);
    Acc acc = monoid.identity();
    if (t0 < t1) {
      constexpr bool has_range = requires(const Kernel& kr, const PartitionView& v, Acc& a) {
        kr.accumulate_range(v, std::int64_t{}, std::int64_t{}, a);
      };
      if constexpr (has_range) {
        if (opt.enforce_weak_memory) {
          kernel.accumulate_range(view, t0, t1, acc);
        } else {
          for (std::int64_t t = t0; t < t1; ++t) kernel.accumulate(view, t, acc);
        }
      } else {
        for (std::int64_t t = t0; t < t1; ++t) kernel.accumulate(view, t, acc);
      }
      part.kernel_evals += t1 - t0;
    }
    results[static_cast<std::size_t>(i)] = std::move(acc);
    std::lock_guard<std::mutex> lock(completion_mutex);
    completion_order.push_back(i);
  });

  Acc total = monoid.identity();
  if (opt.deterministic) {
    for (int i = 0; i < k; ++i) monoid.combine(total, std::move(results[static_cast<std::size_t>(i)]));
  } else {
    for (int i : completion_order) monoid.combine(total, std::move(results[static_cast<std::size_t>(i)]));
  }
  return total;
}

}  // namespace tsfit
