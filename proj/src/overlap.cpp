#include "tsfit/overlap.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace tsfit {

std::vector<std::pair<std::int64_t, std::int64_t>> split_ranges(std::int64_t n, int k) {
  if (k < 1 || static_cast<std::int64_t>(k) > n)
    throw DomainError("split_ranges: need 1 <= k <= n");
  const std::int64_t base = n / k;
  const std::int64_t extra = n % k;  // leading blocks get one more element
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  out.reserve(static_cast<std::size_t>(k));
  std::int64_t begin = 0;
  for (int i = 0; i < k; ++i) {
    const std::int64_t len = base + (i < extra ? 1 : 0);
    out.emplace_back(begin, begin + len);
    begin += len;
  }
  return out;
}

OverlapLayout make_layout(std::int64_t n, int num_partitions, std::int64_t padding) {
  if (padding < 0) throw DomainError("make_layout: padding must be >= 0");
  if (num_partitions < 1 || static_cast<std::int64_t>(num_partitions) > n)
    throw DomainError("make_layout: need 1 <= k <= n");
  return OverlapLayout{n, num_partitions, padding};
}

std::pair<std::int64_t, std::int64_t> OverlapLayout::owned(int i) const {
  return split_ranges(n, num_partitions)[static_cast<std::size_t>(i)];
}

std::pair<std::int64_t, std::int64_t> OverlapLayout::padded(int i) const {
  const auto [a, b] = owned(i);
  return {std::max<std::int64_t>(0, a - padding), std::min(n, b + padding)};
}

std::vector<Partition> make_partitions(const RegularSeries& series, int k, std::int64_t padding) {
  return make_partitions(series, make_layout(series.n(), k, padding));
}

std::vector<Partition> make_partitions(const RegularSeries& series, const OverlapLayout& layout) {
  series.validate();
  if (layout.n != series.n()) throw DomainError("make_partitions: layout length mismatch");
  const auto ranges = split_ranges(layout.n, layout.num_partitions);
  std::vector<Partition> parts;
  parts.reserve(ranges.size());
  for (int i = 0; i < layout.num_partitions; ++i) {
    Partition p;
    p.id = i;
    p.n = layout.n;
    p.padding = layout.padding;
    p.own_begin = ranges[static_cast<std::size_t>(i)].first;
    p.own_end = ranges[static_cast<std::size_t>(i)].second;
    p.pad_begin = std::max<std::int64_t>(0, p.own_begin - layout.padding);
    p.pad_end = std::min(layout.n, p.own_end + layout.padding);
    p.dim = series.d();
    p.data = series.values.middleRows(p.pad_begin, p.pad_end - p.pad_begin);
    parts.push_back(std::move(p));
  }
  return parts;
}

std::int64_t communication_counter(const std::vector<Partition>& parts) {
  std::int64_t total = 0;
  for (const auto& p : parts) total += p.refused_reads;
  return total;
}

void reset_communication_counter(const std::vector<Partition>& parts) {
  for (const auto& p : parts) p.refused_reads = 0;
}

std::int64_t evaluation_count(const std::vector<Partition>& parts) {
  std::int64_t total = 0;
  for (const auto& p : parts) total += p.kernel_evals;
  return total;
}

std::pair<std::int64_t, std::int64_t> admitted_centers(CenterPolicy policy, std::int64_t n,
                                                       std::int64_t half_width) {
  switch (policy) {
    case CenterPolicy::interior_only:
      return {half_width, n - half_width};
    case CenterPolicy::forward:
      return {0, n - half_width};
    case CenterPolicy::backward:
      return {half_width, n};
    case CenterPolicy::clipped:
      return {0, n};
  }
  return {0, 0};
}

namespace detail {

void run_over_partitions(int num_partitions, int threads, const std::function<void(int)>& work) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  const int workers = std::min(threads, num_partitions);
  if (workers <= 1) {
    for (int i = 0; i < num_partitions; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= num_partitions) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

}  // namespace tsfit
