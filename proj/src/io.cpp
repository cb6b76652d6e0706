#include "tsfit/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "tsfit/errors.hpp"

namespace tsfit {

using nlohmann::json;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw IngestionError("csv: unparseable cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col) + ": '" + cell + "'");
  if (!std::isfinite(v))
    throw IngestionError("csv: non-finite value at row " + std::to_string(row) + ", column " +
                         std::to_string(col));
  return v;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_of(const json& rows, Eigen::Index d, const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != d)
    throw IngestionError(std::string("model json: ") + what + " has wrong row count");
  Matrix m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
      throw IngestionError(std::string("model json: ") + what + " has wrong column count");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

RegularSeries parse_csv(const std::string& path, const CsvSpec& spec) {
  std::ifstream in(path);
  if (!in) throw IngestionError("csv: cannot open '" + path + "'");
  std::string line;
  std::size_t row = 0;
  bool first_data_row = true;
  std::int64_t expected_time = 0;
  std::vector<std::vector<double>> values;
  std::int64_t start_index = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (row == 1 && spec.has_header) continue;
    const auto cells = split_line(line, spec.delimiter);
    if (spec.time_column < 0 || static_cast<std::size_t>(spec.time_column) >= cells.size())
      throw IngestionError("csv: row " + std::to_string(row) + " has no time column");
    const double traw = parse_cell(cells[static_cast<std::size_t>(spec.time_column)], row, 0);
    const auto t = static_cast<std::int64_t>(traw);
    if (static_cast<double>(t) != traw)
      throw IngestionError("csv: non-integer time index at row " + std::to_string(row));
    if (first_data_row) {
      start_index = t;
      expected_time = t;
      first_data_row = false;
    }
    if (t != expected_time) {
      if (t == expected_time - 1)
        throw IngestionError("csv: duplicate time index at row " + std::to_string(row));
      throw IngestionError("csv: gap in time index at row " + std::to_string(row) +
                           " (expected " + std::to_string(expected_time) + ", got " +
                           std::to_string(t) + "); irregularly spaced timestamps are rejected");
    }
    ++expected_time;
    std::vector<double> vals;
    vals.reserve(cells.size() - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == static_cast<std::size_t>(spec.time_column)) continue;
      vals.push_back(parse_cell(cells[c], row, c));
    }
    if (vals.empty()) throw IngestionError("csv: row " + std::to_string(row) + " has no values");
    if (!values.empty() && vals.size() != values.front().size())
      throw IngestionError("csv: ragged row at " + std::to_string(row));
    values.push_back(std::move(vals));
  }
  if (values.empty()) throw IngestionError("csv: no data rows in '" + path + "'");
  RegularSeries s;
  s.start_index = start_index;
  s.values.resize(static_cast<Eigen::Index>(values.size()),
                  static_cast<Eigen::Index>(values.front().size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < values[i].size(); ++j)
      s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i][j];
  s.validate();
  return s;
}

void write_series_csv(const std::string& path, const RegularSeries& series) {
  std::ofstream out(path);
  if (!out) throw IngestionError("csv: cannot write '" + path + "'");
  out << "t";
  for (Eigen::Index j = 0; j < series.d(); ++j) out << ",x" << j;
  out << "\n";
  for (std::int64_t t = 0; t < series.n(); ++t) {
    out << (series.start_index + t);
    for (Eigen::Index j = 0; j < series.d(); ++j)
      out << ',' << format_double(series.values(t, j));
    out << "\n";
  }
}

ModelDocument ModelDocument::of_fit(const FittedModel& fit) {
  ModelDocument doc;
  doc.model = fit.model;
  doc.method = fit.method;
  doc.warnings = fit.warnings;
  doc.m_depth = fit.m_depth;
  return doc;
}

json model_to_json(const ModelDocument& doc) {
  const auto& m = doc.model;
  json j;
  j["p"] = m.p();
  j["q"] = m.q();
  j["d"] = static_cast<int>(m.d);
  j["ar"] = json::array();
  for (const auto& a : m.ar) j["ar"].push_back(matrix_rows(a));
  j["ma"] = json::array();
  for (const auto& b : m.ma) j["ma"].push_back(matrix_rows(b));
  j["sigma_eps"] = matrix_rows(m.sigma_eps);
  if (doc.mu) {
    json mu = json::array();
    for (Eigen::Index i = 0; i < doc.mu->size(); ++i) mu.push_back((*doc.mu)(i));
    j["mu"] = std::move(mu);
  }
  if (!doc.method.empty()) j["method"] = doc.method;
  if (!doc.warnings.empty()) j["warnings"] = doc.warnings;
  if (doc.m_depth > 0) j["m_depth"] = doc.m_depth;
  if (doc.bandwidth) j["bandwidth"] = *doc.bandwidth;
  return j;
}

ModelDocument model_from_json(const json& j) {
  ModelDocument doc;
  const int p = j.at("p").get<int>();
  const int q = j.at("q").get<int>();
  const auto d = static_cast<Eigen::Index>(j.at("d").get<int>());
  if (p < 0 || q < 0 || d < 1) throw IngestionError("model json: bad orders");
  doc.model.d = d;
  const auto& ar = j.at("ar");
  if (static_cast<int>(ar.size()) != p) throw IngestionError("model json: ar size != p");
  for (int k = 0; k < p; ++k)
    doc.model.ar.push_back(matrix_of(ar[static_cast<std::size_t>(k)], d, "ar"));
  const auto& ma = j.at("ma");
  if (static_cast<int>(ma.size()) != q) throw IngestionError("model json: ma size != q");
  for (int k = 0; k < q; ++k)
    doc.model.ma.push_back(matrix_of(ma[static_cast<std::size_t>(k)], d, "ma"));
  doc.model.sigma_eps = matrix_of(j.at("sigma_eps"), d, "sigma_eps");
  if (j.contains("mu")) {
    Vector mu(d);
    const auto& arr = j["mu"];
    if (static_cast<Eigen::Index>(arr.size()) != d)
      throw IngestionError("model json: mu dimension mismatch");
    for (Eigen::Index i = 0; i < d; ++i) mu(i) = arr[static_cast<std::size_t>(i)].get<double>();
    doc.mu = std::move(mu);
  }
  if (j.contains("method")) doc.method = j["method"].get<std::string>();
  if (j.contains("warnings")) doc.warnings = j["warnings"].get<std::vector<std::string>>();
  if (j.contains("m_depth")) doc.m_depth = j["m_depth"].get<int>();
  if (j.contains("bandwidth")) doc.bandwidth = j["bandwidth"].get<int>();
  doc.model.validate();
  return doc;
}

void save_model(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw IngestionError("model json: cannot write '" + path + "'");
  out << model_to_json(doc).dump(2) << "\n";
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("model json: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IngestionError("model json: parse failure in '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

nlohmann::json correlogram_to_json(const Correlogram& rho, double band,
                                   CovNormalization normalization) {
  json j;
  j["h_max"] = rho.h_max();
  j["d"] = static_cast<int>(rho.d());
  j["values"] = json::array();
  for (const auto& r : rho.rho) j["values"].push_back(matrix_rows(r));
  j["band"] = band;
  j["normalization"] = to_string(normalization);
  return j;
}

nlohmann::json pacf_to_json(const PartialCorrelogram& kappa, double band,
                            CovNormalization normalization) {
  json j;
  j["p_max"] = kappa.p_max();
  j["d"] = kappa.kappa.empty() ? 0 : static_cast<int>(kappa.kappa.front().rows());
  j["values"] = json::array();
  for (const auto& k : kappa.kappa) j["values"].push_back(matrix_rows(k));
  j["band"] = band;
  j["normalization"] = to_string(normalization);
  return j;
}

}  // namespace tsfit
