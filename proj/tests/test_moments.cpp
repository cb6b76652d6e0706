#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "helpers.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/model.hpp"
#include "tsfit/moments.hpp"

using namespace tsfit;

namespace {

RegularSeries series_of(std::initializer_list<double> xs) {
  RegularSeries s;
  s.values.resize(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) s.values(i++, 0) = x;
  return s;
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("mean of a tiny series") {
  const auto s = series_of({1, 2, 3});
  const Vector mu = mean(s, make_layout(3, 1, 0));
  CHECK(mu(0) == doctest::Approx(2.0));
}

TEST_CASE("mean of simulated white noise is near zero and partition independent") {
  const auto s = simulate(ArmaModel::white_noise(Matrix::Identity(2, 2)), 100000, 0, 5);
  Vector reference;
  for (int k : {1, 4}) {
    const Vector mu = mean(s, make_layout(s.n(), k, 0));
    CHECK(mu.cwiseAbs().maxCoeff() < 0.02);
    if (reference.size() == 0)
      reference = mu;
    else
      CHECK(std::memcmp(reference.data(), mu.data(), 2 * sizeof(double)) == 0);
  }
}

TEST_CASE("center subtracts the mean exactly") {
  const auto s = series_of({1, 3});
  Vector mu(1);
  mu << 2.0;
  const auto c = center(s, mu);
  CHECK(c.values(0, 0) == -1.0);
  CHECK(c.values(1, 0) == 1.0);
  // center(s, mean(s)) has zero mean
  const auto s2 = simulate(ArmaModel::white_noise(Matrix::Identity(1, 1)), 1000, 0, 9);
  const auto centered = center(s2, mean(s2, make_layout(s2.n(), 1, 0)));
  CHECK(mean(centered, make_layout(s2.n(), 1, 0)).cwiseAbs().maxCoeff() < 1e-12);
  // mu = 0 is the identity
  const auto same = center(s, Vector::Zero(1));
  CHECK(same.values == s.values);
  CHECK_THROWS_AS(center(s, Vector::Zero(3)), DomainError);
}

TEST_CASE("per-lag autocovariance on the alternating-sign fixture") {
  // direct evaluation of the 1/(N-h-1) formula: gamma(0) = 4/3, gamma(1) = -1.5
  const auto s = series_of({1, -1, 1, -1});
  const auto cov = autocovariance_per_lag(s, make_layout(4, 1, 1), 1);
  CHECK(cov.gamma(0)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(cov.gamma(1)(0, 0) == doctest::Approx(-1.5).epsilon(1e-14));
  CHECK(cov.normalization() == CovNormalization::per_lag_unbiased);
}

TEST_CASE("per-lag autocovariance of the zero series vanishes") {
  RegularSeries z;
  z.values = RowMatrix::Zero(32, 2);
  const auto cov = autocovariance_per_lag(z, make_layout(32, 2, 4), 4);
  for (int h = 0; h <= 4; ++h) CHECK(cov.gamma(h).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-lag autocovariance approaches the AR(1) model values") {
  ArmaModel m = ArmaModel::pure_ar({Matrix::Constant(1, 1, 0.5)}, Matrix::Identity(1, 1));
  auto s = simulate(m, 200000, 1000, 3);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const auto cov = autocovariance_per_lag(s, make_layout(s.n(), 1, 1), 1);
  CHECK(std::abs(cov.gamma(0)(0, 0) - 4.0 / 3.0) < 0.03);
  CHECK(std::abs(cov.gamma(1)(0, 0) - 2.0 / 3.0) < 0.03);
}

TEST_CASE("both estimators are bit-identical across partition counts") {
  ArmaModel m = ArmaModel::pure_ar({0.4 * Matrix::Identity(3, 3)}, Matrix::Identity(3, 3));
  auto s = simulate(m, 4001, 200, 13);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const int h_max = 5;
  std::vector<Matrix> ref_per, ref_joint;
  for (int k : {1, 2, 3, 8}) {
    const auto parts = make_partitions(s, k, h_max);
    const auto per = autocovariance_per_lag(parts, h_max);
    const auto joint = autocovariance_joint(parts, h_max);
    CHECK(communication_counter(parts) == 0);
    for (int h = 0; h <= h_max; ++h) {
      if (k == 1) {
        ref_per.push_back(per.gamma(h));
        ref_joint.push_back(joint.gamma(h));
      } else {
        CHECK(same_bits(ref_per[static_cast<std::size_t>(h)], per.gamma(h)));
        CHECK(same_bits(ref_joint[static_cast<std::size_t>(h)], joint.gamma(h)));
      }
    }
  }
}

TEST_CASE("joint estimator stays close to the per-lag estimator") {
  ArmaModel m = ArmaModel::pure_ar({Matrix::Constant(1, 1, 0.5)}, Matrix::Identity(1, 1));
  auto s = simulate(m, 200000, 1000, 17);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const int h_max = 4;
  const auto layout = make_layout(s.n(), 4, h_max);
  const auto per = autocovariance_per_lag(s, layout, h_max);
  const auto joint = autocovariance_joint(s, layout, h_max);
  double max_gamma = 0.0;
  for (int h = 0; h <= h_max; ++h)
    max_gamma = std::max(max_gamma, per.gamma(h).cwiseAbs().maxCoeff());
  for (int h = 0; h <= h_max; ++h) {
    const double diff = testutil::max_abs_diff(per.gamma(h), joint.gamma(h));
    CHECK(diff < 0.05);
    CHECK(diff < 10.0 * (2 * h_max + 2) * max_gamma / static_cast<double>(s.n()));
  }
  CHECK(joint.normalization() == CovNormalization::joint_biased);
}

TEST_CASE("gamma(-h) is exactly the transpose for both estimators") {
  ArmaModel m = ArmaModel::pure_ar({0.3 * Matrix::Identity(2, 2)}, Matrix::Identity(2, 2));
  auto s = simulate(m, 5000, 100, 23);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const auto layout = make_layout(s.n(), 3, 3);
  for (const auto& cov : {autocovariance_per_lag(s, layout, 3), autocovariance_joint(s, layout, 3)})
    for (int h = 1; h <= 3; ++h)
      CHECK(same_bits(cov.gamma(-h), Matrix(cov.gamma(h).transpose())));
}

TEST_CASE("autocorrelation normalizes the diagonal to one") {
  ArmaModel m = ArmaModel::pure_ar({0.5 * Matrix::Identity(2, 2)}, Matrix::Identity(2, 2));
  auto s = simulate(m, 20000, 500, 31);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const auto cov = autocovariance_per_lag(s, make_layout(s.n(), 1, 3), 3);
  const auto rho = autocorrelation(cov);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(rho.rho[0](i, i) == doctest::Approx(1.0).epsilon(1e-10));
  // entries stay inside [-1, 1] with slack on real data
  for (const auto& r : rho.rho) CHECK(r.cwiseAbs().maxCoeff() <= 1.0 + 1e-8);
}

TEST_CASE("autocorrelation worked examples") {
  {
    std::vector<Matrix> g = {Matrix::Constant(1, 1, 1.25), Matrix::Constant(1, 1, 0.5)};
    const LaggedCovariance cov(std::move(g), 100, CovNormalization::per_lag_unbiased);
    CHECK(autocorrelation(cov).rho[1](0, 0) == doctest::Approx(0.4).epsilon(1e-14));
  }
  {
    std::vector<Matrix> g = {4 * Matrix::Identity(2, 2), 2 * Matrix::Identity(2, 2)};
    const LaggedCovariance cov(std::move(g), 100, CovNormalization::per_lag_unbiased);
    CHECK(testutil::max_abs_diff(autocorrelation(cov).rho[1], 0.5 * Matrix::Identity(2, 2)) <
          1e-14);
  }
}

TEST_CASE("autocorrelation rejects a degenerate coordinate naming it") {
  std::vector<Matrix> g = {Matrix::Zero(2, 2)};
  g[0](0, 0) = 1.0;  // coordinate 1 has zero variance
  const LaggedCovariance cov(std::move(g), 10, CovNormalization::per_lag_unbiased);
  CHECK_THROWS_WITH_AS(autocorrelation(cov), doctest::Contains("coordinate 1"), DomainError);
}

TEST_CASE("pacf of an exact AR(1) covariance cuts off after lag 1") {
  std::vector<Matrix> g;
  for (int h = 0; h <= 3; ++h) g.push_back(Matrix::Constant(1, 1, std::pow(0.5, h) * 4.0 / 3.0));
  const LaggedCovariance cov(std::move(g), 0, CovNormalization::exact_model);
  const auto kappa = pacf(cov, 3);
  CHECK(kappa.at(1)(0, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::abs(kappa.at(2)(0, 0)) < 1e-10);
  CHECK(std::abs(kappa.at(3)(0, 0)) < 1e-10);
}

TEST_CASE("pacf of white noise vanishes at every order") {
  std::vector<Matrix> g = {Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                           Matrix::Zero(2, 2)};
  const LaggedCovariance cov(std::move(g), 0, CovNormalization::exact_model);
  const auto kappa = pacf(cov, 3);
  for (int p = 1; p <= 3; ++p) CHECK(kappa.at(p).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pacf cutoff on an estimated AR(2) covariance") {
  ArmaModel m = ArmaModel::pure_ar(
      {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.25)}, Matrix::Identity(1, 1));
  auto s = simulate(m, 200000, 1000, 41);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const auto cov = autocovariance_per_lag(s, make_layout(s.n(), 1, 4), 4);
  const auto kappa = pacf(cov, 3);
  CHECK(std::abs(kappa.at(3)(0, 0)) < 0.02);
}

TEST_CASE("pacf vanishes past p for exact multivariate AR(p) covariances") {
  auto g = testutil::rng(55);
  Matrix a1(2, 2), a2(2, 2);
  a1 << 0.5, 0.1, 0.0, 0.4;
  a2 << 0.2, 0.0, 0.05, 0.1;
  ArmaModel m = ArmaModel::pure_ar({a1, a2}, testutil::random_spd(g, 2));
  REQUIRE(is_causal(m));
  const auto cov = model_autocovariance(m, 5, 600);
  const auto kappa = pacf(cov, 5);
  CHECK(kappa.at(3).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(kappa.at(4).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(kappa.at(5).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pacf reports singular systems with the failing order") {
  std::vector<Matrix> g = {Matrix::Identity(1, 1), Matrix::Identity(1, 1),
                           Matrix::Identity(1, 1)};
  const LaggedCovariance cov(std::move(g), 0, CovNormalization::exact_model);
  try {
    pacf(cov, 2);
    FAIL("expected SingularMomentMatrix");
  } catch (const SingularMomentMatrix& e) {
    CHECK(e.order() == 2);
    CHECK(e.condition() > 1e12);
  }
  // a ridge rescues the solve
  CHECK_NOTHROW(pacf(cov, 2, 1e-6));
}

TEST_CASE("fast mode tracks deterministic mode within reassociation tolerance") {
  ArmaModel m = ArmaModel::pure_ar({Matrix::Constant(1, 1, 0.5)}, Matrix::Identity(1, 1));
  auto s = simulate(m, 50000, 500, 47);
  s = center(s, mean(s, make_layout(s.n(), 1, 0)));
  const auto parts = make_partitions(s, 4, 5);
  EngineOptions fast;
  fast.deterministic = false;
  const auto exact = autocovariance_joint(parts, 5);
  const auto loose = autocovariance_joint(parts, 5, fast);
  for (int h = 0; h <= 5; ++h)
    CHECK(testutil::max_abs_diff(exact.gamma(h), loose.gamma(h)) < 1e-9);
  const Vector mu_exact = mean(parts);
  const Vector mu_fast = mean(parts, fast);
  CHECK((mu_exact - mu_fast).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("significance band") {
  CHECK(significance_band(10000) == doctest::Approx(0.0196));
  CHECK(significance_band(4) == doctest::Approx(0.98));
  for (std::int64_t n : {16, 400, 10000})
    CHECK(significance_band(4 * n) == doctest::Approx(significance_band(n) / 2).epsilon(1e-14));
  CHECK_THROWS_AS(significance_band(1), DomainError);
}
