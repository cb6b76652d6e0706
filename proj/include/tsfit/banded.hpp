#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsfit/fit_mle.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

// Order-1 AR model whose coefficient matrix has bandwidth b << d, with
// block-diagonal noise precision over contiguous spatial partitions
// P_1..P_P. The band is stored by diagonals: diags row k+b holds the k-th
// diagonal, entry i multiplying x[i+k]; off-matrix positions stay zero.
struct BandedArModel {
  int d = 0;
  int bandwidth = 0;
  RowMatrix diags;  // (2b+1) x d
  std::vector<std::pair<int, int>> partitions;  // P_i = [begin, end)
  std::vector<Matrix> precision;                // pi_i, SPD, one per partition

  Matrix dense() const;
  Matrix dense_precision() const;
  Matrix dense_sigma() const;  // inverse of the block-diagonal precision
  void validate() const;

  static BandedArModel from_dense(const Matrix& a, int bandwidth,
                                  std::vector<std::pair<int, int>> partitions,
                                  std::vector<Matrix> precision);
};

// One-step prediction A x_t. Each row block reads only its halo slice
// x[P_i^+]; equals the dense product within 1e-12.
Vector banded_predict(const BandedArModel& model, const Vector& x_t);

// One spatial partition's working set: owned rows plus the 2b halo columns,
// with refused-column accounting mirroring the time-axis partitions.
struct SpatialHalo {
  int id = 0;
  int rows_begin = 0, rows_end = 0;  // P_i
  int cols_begin = 0, cols_end = 0;  // P_i^+
  RowMatrix data;                    // n x (cols_end - cols_begin) column slice
  mutable std::int64_t refused_reads = 0;
};

std::vector<SpatialHalo> make_spatial_halos(const RegularSeries& series,
                                            const std::vector<std::pair<int, int>>& partitions,
                                            int bandwidth);
std::int64_t spatial_communication_counter(const std::vector<SpatialHalo>& halos);

// Gradient of the banded conditional log-likelihood with respect to the band
// entries, evaluated per spatial partition from its halo only. Returned in
// diagonal storage (off-band exactly zero).
RowMatrix banded_loglik_grad(const std::vector<SpatialHalo>& halos, const BandedArModel& model,
                             const EngineOptions& opt = {});
double banded_loglik(const std::vector<SpatialHalo>& halos, const BandedArModel& model,
                     const EngineOptions& opt = {});

struct BandedFitResult {
  BandedArModel model;
  bool converged = false;
  int iters = 0;
  std::vector<std::string> warnings;
  std::int64_t refused_reads = 0;  // spatial cross-partition requests (stays 0)
};

// Maximizes the banded conditional log-likelihood over the band entries by
// gradient ascent with spatially partitioned gradients. When `precision` is
// absent it starts from identity blocks and refreshes them from block
// residual covariances for opts.rounds rounds.
BandedFitResult fit_banded_ar(const RegularSeries& series, int bandwidth,
                              int num_spatial_partitions, const MleOptions& opts,
                              std::optional<std::vector<Matrix>> precision = std::nullopt,
                              const EngineOptions& engine = {});

}  // namespace tsfit
