#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/exact_sum.hpp"

using tsfit::ExactSum;

namespace {

double exact_round(const std::vector<double>& xs) {
  ExactSum s;
  for (double x : xs) s.add(x);
  return s.round();
}

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

TEST_CASE("matches the expansion-sum oracle on mixed-magnitude data") {
  auto g = testutil::rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs;
    testutil::ExpansionSum oracle;
    for (int i = 0; i < 400; ++i) {
      const double mag = std::ldexp(testutil::uniform(g, -1.0, 1.0),
                                    static_cast<int>(testutil::uniform(g, -40, 40)));
      xs.push_back(mag);
      oracle.add(mag);
    }
    const double got = exact_round(xs);
    const double want = oracle.value();
    CHECK(got == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("bit-identical under shuffling and regrouping") {
  auto g = testutil::rng(7);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) {
    xs.push_back(std::ldexp(testutil::uniform(g, -1.0, 1.0),
                            static_cast<int>(testutil::uniform(g, -300, 300))));
  }
  const double reference = exact_round(xs);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(xs.begin(), xs.end(), g);
    // random partition into sub-accumulators merged in random order
    const int k = 1 + static_cast<int>(testutil::uniform(g, 0, 7.99));
    std::vector<ExactSum> subs(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < xs.size(); ++i)
      subs[i % static_cast<std::size_t>(k)].add(xs[i]);
    std::shuffle(subs.begin(), subs.end(), g);
    ExactSum total;
    for (const auto& s : subs) total.merge(s);
    CHECK(bits_of(total.round()) == bits_of(reference));
  }
}

TEST_CASE("classic cancellation cases are exact") {
  CHECK(exact_round({1e100, 1.0, -1e100}) == 1.0);
  CHECK(exact_round({1.0, 1e-300, -1.0}) == 1e-300);
  CHECK(exact_round({}) == 0.0);
  CHECK(exact_round({0.0, -0.0}) == 0.0);
  // pairwise cancellation of a large random set
  auto g = testutil::rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i) {
    const double v = std::ldexp(testutil::uniform(g, -1, 1),
                                static_cast<int>(testutil::uniform(g, -200, 200)));
    xs.push_back(v);
    xs.push_back(-v);
  }
  std::shuffle(xs.begin(), xs.end(), g);
  CHECK(exact_round(xs) == 0.0);
}

TEST_CASE("integer sums are exact including sign flips") {
  auto g = testutil::rng(5);
  std::vector<double> xs;
  long long want = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto v = static_cast<long long>(testutil::uniform(g, -1e12, 1e12));
    want += v;
    xs.push_back(static_cast<double>(v));
  }
  CHECK(exact_round(xs) == static_cast<double>(want));
}

TEST_CASE("negative totals round like positives") {
  auto g = testutil::rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs;
    for (int i = 0; i < 50; ++i)
      xs.push_back(std::ldexp(testutil::uniform(g, -1, 1),
                              static_cast<int>(testutil::uniform(g, -30, 30))));
    std::vector<double> neg;
    for (double x : xs) neg.push_back(-x);
    CHECK(bits_of(exact_round(neg)) == bits_of(-exact_round(xs)));
  }
}

TEST_CASE("subnormals accumulate deterministically") {
  const double tiny = std::ldexp(1.0, -1074);
  std::vector<double> xs(1000, tiny);
  CHECK(exact_round(xs) == 1000 * tiny);
  ExactSum a, b;
  for (int i = 0; i < 500; ++i) a.add(tiny);
  for (int i = 0; i < 500; ++i) b.add(tiny);
  a.merge(b);
  CHECK(bits_of(a.round()) == bits_of(exact_round(xs)));
}

TEST_CASE("non-finite addends are rejected") {
  ExactSum s;
  CHECK_THROWS_AS(s.add(std::numeric_limits<double>::infinity()), tsfit::DomainError);
  CHECK_THROWS_AS(s.add(std::numeric_limits<double>::quiet_NaN()), tsfit::DomainError);
}

TEST_CASE("reset clears the accumulator") {
  ExactSum s;
  s.add(3.5);
  s.reset();
  CHECK(s.round() == 0.0);
}
