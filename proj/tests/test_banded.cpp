#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tsfit/banded.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/fit_mle.hpp"
#include "tsfit/model.hpp"
#include "tsfit/moments.hpp"

using namespace tsfit;

namespace {

std::vector<std::pair<int, int>> even_partitions(int d, int parts) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [a, b] : split_ranges(d, parts))
    out.emplace_back(static_cast<int>(a), static_cast<int>(b));
  return out;
}

std::vector<Matrix> identity_blocks(const std::vector<std::pair<int, int>>& parts) {
  std::vector<Matrix> out;
  for (const auto& [a, b] : parts) out.push_back(Matrix::Identity(b - a, b - a));
  return out;
}

// Random banded matrix rescaled to the requested spectral radius.
Matrix random_banded(std::mt19937_64& g, int d, int b, double radius) {
  Matrix a = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = std::max(0, i - b); j <= std::min(d - 1, i + b); ++j)
      a(i, j) = testutil::uniform(g, -1, 1);
  const double rho = Eigen::EigenSolver<Matrix>(a, false).eigenvalues().cwiseAbs().maxCoeff();
  a *= radius / rho;
  return a;
}

}  // namespace

TEST_CASE("banded model validation catches structure violations") {
  BandedArModel m;
  m.d = 4;
  m.bandwidth = 1;
  m.diags = RowMatrix::Zero(3, 4);
  m.partitions = even_partitions(4, 2);
  m.precision = identity_blocks(m.partitions);
  CHECK_NOTHROW(m.validate());
  m.diags(0, 0) = 1.0;  // sub-diagonal entry of row 0 points outside the matrix
  CHECK_THROWS_AS(m.validate(), DomainError);
  m.diags(0, 0) = 0.0;
  m.precision[0](0, 0) = -1.0;
  CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("banded_predict identity and zero matrices") {
  const auto parts = even_partitions(6, 2);
  const auto eye = BandedArModel::from_dense(Matrix::Identity(6, 6), 0, parts,
                                             identity_blocks(parts));
  Vector x(6);
  x << 1, 2, 3, 4, 5, 6;
  CHECK((banded_predict(eye, x) - x).cwiseAbs().maxCoeff() == 0.0);
  const auto zero =
      BandedArModel::from_dense(Matrix::Zero(6, 6), 0, parts, identity_blocks(parts));
  CHECK(banded_predict(zero, x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("banded_predict equals the dense product, d=50 b=3") {
  auto g = testutil::rng(50);
  const Matrix a = random_banded(g, 50, 3, 0.9);
  const auto parts = even_partitions(50, 4);
  const auto model = BandedArModel::from_dense(a, 3, parts, identity_blocks(parts));
  Vector x(50);
  for (int i = 0; i < 50; ++i) x(i) = testutil::uniform(g, -2, 2);
  CHECK((banded_predict(model, x) - a * x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("banded gradient equals the dense gradient restricted to the band") {
  auto g = testutil::rng(81);
  const int d = 8, b = 1;
  ArmaModel sim_model = ArmaModel::pure_ar({random_banded(g, d, b, 0.6)}, Matrix::Identity(d, d));
  const auto s = simulate(sim_model, 400, 100, 4);
  const auto parts = even_partitions(d, 2);
  const Matrix a_eval = random_banded(g, d, b, 0.5);
  const auto model = BandedArModel::from_dense(a_eval, b, parts, identity_blocks(parts));
  const auto halos = make_spatial_halos(s, parts, b);

  const RowMatrix banded = banded_loglik_grad(halos, model);
  const auto dense =
      conditional_loglik_grad(s, {a_eval}, model.dense_sigma(), make_layout(s.n(), 1, 1));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double got = std::abs(i - j) <= b ? banded(j - i + b, i) : 0.0;
      if (std::abs(i - j) > b)
        CHECK(got == 0.0);
      else
        CHECK(std::abs(got - dense[0](i, j)) < 1e-10);
    }
  CHECK(spatial_communication_counter(halos) == 0);
}

TEST_CASE("banded loglik equals the dense conditional loglik for block precision") {
  auto g = testutil::rng(82);
  const int d = 6, b = 2;
  const auto s = simulate(ArmaModel::pure_ar({random_banded(g, d, b, 0.5)}, Matrix::Identity(d, d)),
                          300, 100, 5);
  const auto parts = even_partitions(d, 3);
  std::vector<Matrix> precision;
  for (const auto& [a0, b0] : parts) precision.push_back(testutil::random_spd(g, b0 - a0));
  const Matrix a_eval = random_banded(g, d, b, 0.4);
  const auto model = BandedArModel::from_dense(a_eval, b, parts, precision);
  const auto halos = make_spatial_halos(s, parts, b);
  const double banded = banded_loglik(halos, model);
  const double dense =
      conditional_loglik(s, {a_eval}, model.dense_sigma(), make_layout(s.n(), 1, 1));
  CHECK(banded == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("bandwidth zero decouples into independent scalar fits") {
  const int d = 3;
  Matrix a = Matrix::Zero(d, d);
  a.diagonal() << 0.5, -0.3, 0.7;
  auto s = simulate(ArmaModel::pure_ar({a}, Matrix::Identity(d, d)), 20000, 500, 6);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  MleOptions opts;
  opts.grad_tol = 1e-9;
  opts.max_iters = 4000;
  const auto banded = fit_banded_ar(s, 0, d, opts,
                                    identity_blocks(even_partitions(d, d)));
  for (int i = 0; i < d; ++i) {
    RegularSeries coord;
    coord.values = s.values.col(i);
    const auto scalar = fit_ar_mle(coord, 1, Matrix::Identity(1, 1), opts);
    CHECK(std::abs(banded.model.dense()(i, i) - scalar.model.ar[0](0, 0)) < 1e-8);
  }
}

TEST_CASE("fit_banded_ar recovers a random stable banded truth") {
  auto g = testutil::rng(84);
  const int d = 20, b = 2;
  const Matrix a_truth = random_banded(g, d, b, 0.7);
  auto s = simulate(ArmaModel::pure_ar({a_truth}, Matrix::Identity(d, d)), 100000, 1000, 7);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  MleOptions opts;
  opts.grad_tol = 5e-2;
  opts.max_iters = 2000;
  const auto fit = fit_banded_ar(s, b, 4, opts, identity_blocks(even_partitions(d, 4)));
  CHECK(testutil::max_abs_diff(fit.model.dense(), a_truth) < 0.05);
  CHECK(fit.refused_reads == 0);
  CHECK(fit.converged);
  // band preservation: off-band entries of the dense reconstruction are exact zeros
  const Matrix dense = fit.model.dense();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (std::abs(i - j) > b) CHECK(dense(i, j) == 0.0);
}

TEST_CASE("fit_banded_ar estimates block precisions when they are unknown") {
  auto g = testutil::rng(85);
  const int d = 6, b = 1;
  const Matrix a_truth = random_banded(g, d, b, 0.6);
  Matrix sigma = Matrix::Zero(d, d);
  const auto parts = even_partitions(d, 3);
  for (const auto& [a0, b0] : parts) {
    const Matrix blk = testutil::random_spd(g, b0 - a0);
    sigma.block(a0, a0, b0 - a0, b0 - a0) = blk;
  }
  auto s = simulate(ArmaModel::pure_ar({a_truth}, sigma), 50000, 1000, 8);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  MleOptions opts;
  opts.grad_tol = 1e-2;
  opts.max_iters = 2000;
  opts.rounds = 3;
  const auto fit = fit_banded_ar(s, b, 3, opts);
  CHECK(testutil::max_abs_diff(fit.model.dense(), a_truth) < 0.08);
  CHECK(testutil::max_abs_diff(fit.model.dense_sigma(), sigma) < 0.15);
}

TEST_CASE("partition conformance errors") {
  const auto s = simulate(ArmaModel::white_noise(Matrix::Identity(4, 4)), 50, 0, 9);
  MleOptions opts;
  CHECK_THROWS_AS(fit_banded_ar(s, 4, 2, opts), DomainError);  // bandwidth >= d
  std::vector<Matrix> wrong = identity_blocks(even_partitions(4, 2));
  wrong[0] = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(fit_banded_ar(s, 1, 2, opts, wrong), DomainError);
}
