#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "tsfit/fit_freq.hpp"
#include "tsfit/lagged_covariance.hpp"
#include "tsfit/model.hpp"
#include "tsfit/moments.hpp"
#include "tsfit/series.hpp"

namespace tsfit {

struct CsvSpec {
  char delimiter = ',';
  bool has_header = true;
  int time_column = 0;  // integer time index column; remaining columns are values
};

// Reads a regular series; rejects time-index gaps and duplicates (irregular
// timestamps are out of scope) and unparseable cells, naming the row.
RegularSeries parse_csv(const std::string& path, const CsvSpec& spec = {});

// Writes header t,x0,..,x{d-1} and one row per observation, %.17g floats.
void write_series_csv(const std::string& path, const RegularSeries& series);

// Canonical model persistence plus fit metadata.
struct ModelDocument {
  ArmaModel model;
  std::optional<Vector> mu;  // mean removed before fitting
  std::string method;
  std::vector<std::string> warnings;
  int m_depth = 0;
  std::optional<int> bandwidth;  // banded fits

  static ModelDocument of_fit(const FittedModel& fit);
};

nlohmann::json model_to_json(const ModelDocument& doc);
ModelDocument model_from_json(const nlohmann::json& j);
void save_model(const std::string& path, const ModelDocument& doc);
ModelDocument load_model(const std::string& path);

// ACF / PACF emission: {"h_max"|"p_max", "d", "values", "band", "normalization"}.
nlohmann::json correlogram_to_json(const Correlogram& rho, double band,
                                   CovNormalization normalization);
nlohmann::json pacf_to_json(const PartialCorrelogram& kappa, double band,
                            CovNormalization normalization);

}  // namespace tsfit
