#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/series.hpp"

using namespace tsfit;

namespace {

RegularSeries series_of(std::initializer_list<double> xs) {
  RegularSeries s;
  s.values.resize(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) s.values(i++, 0) = x;
  return s;
}

}  // namespace

TEST_CASE("difference of the running-sum example") {
  const auto s = series_of({1, 3, 6, 10});
  const auto d1 = difference(s, 1);
  REQUIRE(d1.n() == 3);
  CHECK(d1.values(0, 0) == 2);
  CHECK(d1.values(1, 0) == 3);
  CHECK(d1.values(2, 0) == 4);
  CHECK(d1.start_index == s.start_index);

  const auto d2 = difference(s, 2);
  REQUIRE(d2.n() == 2);
  CHECK(d2.values(0, 0) == 1);
  CHECK(d2.values(1, 0) == 1);
  // order-2 equals applying order-1 twice
  const auto twice = difference(difference(s, 1), 1);
  CHECK(d2.values == twice.values);
}

TEST_CASE("difference order 0 is the identity") {
  const auto s = series_of({4, 2, 7});
  const auto d = difference(s, 0);
  CHECK(d.values == s.values);
}

TEST_CASE("difference rejects series shorter than the order") {
  const auto s = series_of({1, 2});
  CHECK_THROWS_AS(difference(s, 2), DomainError);
}

TEST_CASE("integrate inverts difference on the worked example") {
  const auto s = series_of({2, 3, 4});
  Vector init(1);
  init << 1;
  const auto integrated = integrate(s, init, 1);
  REQUIRE(integrated.n() == 4);
  CHECK(integrated.values(0, 0) == 1);
  CHECK(integrated.values(1, 0) == 3);
  CHECK(integrated.values(2, 0) == 6);
  CHECK(integrated.values(3, 0) == 10);
}

TEST_CASE("integrate of the zero series stays zero") {
  RegularSeries z;
  z.values = RowMatrix::Zero(5, 2);
  const auto integrated = integrate(z, Vector::Zero(2), 1);
  CHECK(integrated.values.isZero(0.0));
}

TEST_CASE("difference(integrate(s)) is the identity to 1e-12") {
  auto g = testutil::rng(42);
  for (int order = 1; order <= 3; ++order) {
    RegularSeries s;
    s.values.resize(64, 3);
    for (Eigen::Index i = 0; i < s.values.rows(); ++i)
      for (Eigen::Index j = 0; j < 3; ++j) s.values(i, j) = testutil::uniform(g, -5, 5);
    Vector init(3);
    for (Eigen::Index j = 0; j < 3; ++j) init(j) = testutil::uniform(g, -2, 2);
    const auto integrated = integrate(s, init, order);
    const auto round_trip = difference(integrated, order);
    REQUIRE(round_trip.n() == s.n());
    // 1e-12 absolute at order 1; higher orders inflate the intermediate scale
    const double slack =
        order == 1 ? 1e-12 : 1e-14 * integrated.values.cwiseAbs().maxCoeff();
    CHECK((round_trip.values - s.values).cwiseAbs().maxCoeff() < slack);
  }
}

TEST_CASE("integrate validates the initial vector dimension") {
  const auto s = series_of({1, 2, 3});
  CHECK_THROWS_AS(integrate(s, Vector::Zero(2), 1), DomainError);
}

TEST_CASE("validate rejects non-finite and empty input") {
  RegularSeries s;
  s.values = RowMatrix::Zero(0, 1);
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.values = RowMatrix::Zero(2, 1);
  s.values(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(s.validate(), DomainError);
}
