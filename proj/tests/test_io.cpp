#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/io.hpp"
#include "tsfit/model.hpp"

using namespace tsfit;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/tsfit_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("csv parse of a minimal file") {
  TempFile f("min.csv");
  write_text(f.path, "t,x\n0,1.0\n1,2.0\n");
  const auto s = parse_csv(f.path);
  CHECK(s.n() == 2);
  CHECK(s.d() == 1);
  CHECK(s.start_index == 0);
  CHECK(s.values(0, 0) == 1.0);
  CHECK(s.values(1, 0) == 2.0);
}

TEST_CASE("csv gap and duplicate detection names the row") {
  TempFile f("gap.csv");
  write_text(f.path, "t,x\n0,1.0\n2,2.0\n");
  CHECK_THROWS_WITH_AS(parse_csv(f.path), doctest::Contains("row 3"), IngestionError);
  write_text(f.path, "t,x\n0,1.0\n0,2.0\n");
  CHECK_THROWS_WITH_AS(parse_csv(f.path), doctest::Contains("duplicate"), IngestionError);
}

TEST_CASE("csv multi-column and nonzero start index") {
  TempFile f("multi.csv");
  write_text(f.path, "t,a,b,c\n5,1,2,3\n6,4,5,6\n7,7,8,9\n8,1,1,1\n9,2,2,2\n");
  const auto s = parse_csv(f.path);
  CHECK(s.n() == 5);
  CHECK(s.d() == 3);
  CHECK(s.start_index == 5);
  CHECK(s.values(2, 1) == 8.0);
}

TEST_CASE("csv bad cells are reported with row and column") {
  TempFile f("bad.csv");
  write_text(f.path, "t,x\n0,banana\n");
  CHECK_THROWS_WITH_AS(parse_csv(f.path), doctest::Contains("row 2"), IngestionError);
  write_text(f.path, "t,x\n0.5,1\n");
  CHECK_THROWS_WITH_AS(parse_csv(f.path), doctest::Contains("non-integer"), IngestionError);
  CHECK_THROWS_AS(parse_csv("/tmp/tsfit_does_not_exist.csv"), IngestionError);
}

TEST_CASE("series csv round trip is bit exact") {
  const auto s = simulate(ArmaModel::white_noise(Matrix::Identity(3, 3)), 200, 0, 19);
  TempFile f("round.csv");
  write_series_csv(f.path, s);
  const auto back = parse_csv(f.path);
  CHECK(back.values == s.values);
  CHECK(back.start_index == s.start_index);
  // writing twice yields byte-identical files
  TempFile f2("round2.csv");
  write_series_csv(f2.path, s);
  CHECK(read_text(f.path) == read_text(f2.path));
}

TEST_CASE("model json round trip with metadata") {
  auto g = testutil::rng(91);
  ModelDocument doc;
  doc.model.d = 2;
  doc.model.ar = {testutil::random_matrix(g, 2, 0.4)};
  doc.model.ma = {testutil::random_matrix(g, 2, 0.2)};
  doc.model.sigma_eps = testutil::random_spd(g, 2);
  doc.mu = Vector::Constant(2, 1.5);
  doc.method = "arma_hybrid";
  doc.warnings = {"non_invertible"};
  doc.m_depth = 22;
  TempFile f("model.json");
  save_model(f.path, doc);
  const auto back = load_model(f.path);
  CHECK(back.model.p() == 1);
  CHECK(back.model.q() == 1);
  CHECK(back.model.ar[0] == doc.model.ar[0]);
  CHECK(back.model.ma[0] == doc.model.ma[0]);
  CHECK(back.model.sigma_eps == doc.model.sigma_eps);
  CHECK(back.mu.has_value());
  CHECK((*back.mu - *doc.mu).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.method == doc.method);
  CHECK(back.warnings == doc.warnings);
  CHECK(back.m_depth == 22);
}

TEST_CASE("model json validates shapes") {
  TempFile f("badmodel.json");
  write_text(f.path, R"({"p":1,"q":0,"d":2,"ar":[[[0.5]]],"ma":[],"sigma_eps":[[1,0],[0,1]]})");
  CHECK_THROWS_AS(load_model(f.path), IngestionError);
  write_text(f.path, "{not json");
  CHECK_THROWS_AS(load_model(f.path), IngestionError);
}

TEST_CASE("correlogram json carries the band and normalization") {
  Correlogram rho;
  rho.rho = {Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)};
  const auto j = correlogram_to_json(rho, 0.0196, CovNormalization::per_lag_unbiased);
  CHECK(j.at("h_max").get<int>() == 1);
  CHECK(j.at("d").get<int>() == 2);
  CHECK(j.at("band").get<double>() == 0.0196);
  CHECK(j.at("normalization").get<std::string>() == "per-lag-unbiased");
  CHECK(j.at("values").size() == 2);
  CHECK(j.at("values")[1][0][0].get<double>() == 0.5);
}

TEST_CASE("pacf json uses p_max") {
  PartialCorrelogram kappa;
  kappa.kappa = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 0.0)};
  const auto j = pacf_to_json(kappa, 0.1, CovNormalization::per_lag_unbiased);
  CHECK(j.at("p_max").get<int>() == 2);
  CHECK(j.at("values")[0][0][0].get<double>() == 0.5);
}
