// tsfit command line: simulate, diff, acf, pacf, fit, forecast.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "tsfit/banded.hpp"
#include "tsfit/errors.hpp"
#include "tsfit/fit_freq.hpp"
#include "tsfit/fit_mle.hpp"
#include "tsfit/forecast.hpp"
#include "tsfit/io.hpp"
#include "tsfit/model.hpp"
#include "tsfit/moments.hpp"
#include "tsfit/overlap.hpp"

namespace {

using namespace tsfit;

int default_threads() {
  if (const char* env = std::getenv("TSFIT_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct EngineFlags {
  int threads = default_threads();
  int partitions = 0;  // 0 = match threads
  bool fast = false;   // opt out of deterministic accumulation

  void attach(CLI::App* cmd) {
    cmd->add_option("--threads", threads, "Worker threads (default: TSFIT_THREADS or hardware)");
    cmd->add_option("--partitions", partitions, "Partition count (default: thread count)");
    cmd->add_flag("--fast", fast,
                  "Unordered floating-point reduction (not partition-count reproducible)");
  }
  EngineOptions engine() const { return EngineOptions{threads, !fast, true}; }
  int k(std::int64_t n) const {
    std::int64_t want = partitions > 0 ? partitions : threads;
    // A partition must be able to own at least one step.
    if (want > n) want = n;
    return static_cast<int>(want);
  }
};

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

int cmd_simulate(const std::string& model_path, std::int64_t n, std::int64_t burn_in,
                 std::uint64_t seed, const std::string& out_path) {
  const ModelDocument doc = load_model(model_path);
  RegularSeries s = simulate(doc.model, n, burn_in, seed);
  if (doc.mu) s.values.rowwise() += doc.mu->transpose();
  write_series_csv(out_path, s);
  return 0;
}

int cmd_diff(const std::string& in_path, int order, const std::string& out_path) {
  const RegularSeries s = parse_csv(in_path);
  write_series_csv(out_path, difference(s, order));
  return 0;
}

int cmd_acf(const std::string& in_path, int max_lag, bool joint, const EngineFlags& flags,
            const std::string& out_path) {
  RegularSeries s = parse_csv(in_path);
  const auto layout = make_layout(s.n(), flags.k(s.n()), max_lag);
  const EngineOptions engine = flags.engine();
  s = center(s, mean(s, layout, engine));
  const auto parts = make_partitions(s, layout);
  const LaggedCovariance cov = joint ? autocovariance_joint(parts, max_lag, engine)
                                     : autocovariance_per_lag(parts, max_lag, engine);
  write_json(out_path, correlogram_to_json(autocorrelation(cov), significance_band(s.n()),
                                           cov.normalization()));
  return 0;
}

int cmd_pacf(const std::string& in_path, int p_max, double ridge, const EngineFlags& flags,
             const std::string& out_path) {
  RegularSeries s = parse_csv(in_path);
  const auto layout = make_layout(s.n(), flags.k(s.n()), p_max);
  const EngineOptions engine = flags.engine();
  s = center(s, mean(s, layout, engine));
  const LaggedCovariance cov =
      autocovariance_per_lag(make_partitions(s, layout), p_max, engine);
  write_json(out_path, pacf_to_json(pacf(cov, p_max, ridge), significance_band(s.n()),
                                    cov.normalization()));
  return 0;
}

struct FitFlags {
  std::string method = "yule-walker";
  int p = 0;
  int q = 0;
  int m_depth = 0;
  // mle knobs
  std::string step = "eigen";
  bool sgd = false;
  double sgd_step0 = 0.5;
  int max_iters = 500;
  double grad_tol = 1e-6;
  int rounds = 3;
  std::uint64_t seed = 0;
  bool warm_start = false;
  // banded
  int bandwidth = -1;
  int spatial_partitions = 1;
};

StepRule parse_step_rule(const std::string& text) {
  if (text == "eigen") return StepRule::eigen();
  if (text == "backtrack") return StepRule::backtracking();
  if (text.rfind("fixed:", 0) == 0) {
    const double eta = std::atof(text.c_str() + 6);
    if (!(eta > 0)) throw DomainError("--step fixed:ETA needs ETA > 0");
    return StepRule::fixed(eta);
  }
  throw CLI::ValidationError("--step", "expected eigen, backtrack or fixed:ETA");
}

int cmd_fit(const std::string& in_path, const FitFlags& f, const EngineFlags& flags,
            const std::string& out_path) {
  RegularSeries s = parse_csv(in_path);
  const EngineOptions engine = flags.engine();
  const std::int64_t mean_layout_k = flags.k(s.n());
  const Vector mu = mean(s, make_layout(s.n(), static_cast<int>(mean_layout_k), 0), engine);
  s = center(s, mu);

  ModelDocument doc;
  if (f.method == "banded") {
    if (f.bandwidth < 0) throw DomainError("fit --method banded requires --bandwidth");
    MleOptions opts;
    opts.max_iters = f.max_iters;
    opts.grad_tol = f.grad_tol;
    opts.step = parse_step_rule(f.step);
    opts.rounds = f.rounds;
    opts.seed = f.seed;
    const BandedFitResult result =
        fit_banded_ar(s, f.bandwidth, f.spatial_partitions, opts, std::nullopt, engine);
    doc.model.d = s.d();
    doc.model.ar = {result.model.dense()};
    doc.model.sigma_eps = result.model.dense_sigma();
    doc.method = "banded_mle";
    doc.warnings = result.warnings;
    doc.bandwidth = f.bandwidth;
  } else if (f.method == "mle") {
    MleOptions opts;
    opts.max_iters = f.max_iters;
    opts.grad_tol = f.grad_tol;
    opts.step = parse_step_rule(f.step);
    opts.sgd = f.sgd;
    opts.sgd_step0 = f.sgd_step0;
    opts.seed = f.seed;
    opts.rounds = f.rounds;
    if (f.warm_start) opts.init = MleOptions::Init::yule_walker_warm_start;
    if (f.p < 1) throw DomainError("fit --method mle requires --p >= 1");
    const auto layout = make_layout(s.n(), flags.k(s.n()), f.p);
    doc = ModelDocument::of_fit(fit_ar_mle(s, f.p, std::nullopt, opts, layout, engine));
  } else {
    int h_needed = 0;
    if (f.method == "yule-walker" || f.method == "durbin-levinson") {
      h_needed = f.p;
    } else if (f.method == "innovations") {
      h_needed = f.m_depth > 0 ? f.m_depth : f.q + 20;
    } else if (f.method == "arma") {
      h_needed = f.m_depth > 0 ? f.m_depth : f.p + f.q + 20;
    } else {
      throw CLI::ValidationError("--method",
                                 "expected yule-walker, durbin-levinson, innovations, arma, "
                                 "mle or banded");
    }
    const auto layout = make_layout(s.n(), flags.k(s.n()), h_needed);
    const LaggedCovariance cov =
        autocovariance_per_lag(make_partitions(s, layout), h_needed, engine);
    if (f.method == "yule-walker")
      doc = ModelDocument::of_fit(fit_ar_yule_walker(cov, f.p));
    else if (f.method == "durbin-levinson")
      doc = ModelDocument::of_fit(fit_ar_durbin_levinson(cov, f.p).fit);
    else if (f.method == "innovations")
      doc = ModelDocument::of_fit(fit_ma(cov, f.q, f.m_depth));
    else
      doc = ModelDocument::of_fit(fit_arma(cov, f.p, f.q, f.m_depth));
  }
  doc.mu = mu;
  save_model(out_path, doc);
  if (!doc.warnings.empty()) {
    std::cerr << "fit warnings:";
    for (const auto& w : doc.warnings) std::cerr << ' ' << w;
    std::cerr << "\n";
  }
  return 0;
}

int cmd_forecast(const std::string& model_path, const std::string& in_path, int steps,
                 bool one_step_all, bool exact_warmup, const std::string& out_path,
                 const std::string& residuals_path) {
  const ModelDocument doc = load_model(model_path);
  RegularSeries s = parse_csv(in_path);
  if (s.d() != doc.model.d) throw DomainError("forecast: model/data dimension mismatch");
  Vector mu = Vector::Zero(s.d());
  if (doc.mu) mu = *doc.mu;
  s.values.rowwise() -= mu.transpose();

  ForecastResult result;
  if (doc.model.q() == 0 && !one_step_all) {
    const int p = doc.model.p();
    if (s.n() < p) throw DomainError("forecast: need at least p observations");
    const RowMatrix recent = s.values.bottomRows(p);
    result = forecast_ar(doc.model, recent, steps);
  } else {
    result = forecast_arma_one_step(doc.model, s, steps, exact_warmup);
  }

  RegularSeries pred;
  pred.start_index = s.start_index + s.n();
  pred.values = result.predictions;
  pred.values.rowwise() += mu.transpose();
  write_series_csv(out_path, pred);
  if (one_step_all && !residuals_path.empty()) {
    RegularSeries res;
    res.start_index = s.start_index + std::max(doc.model.p(), doc.model.q());
    res.values = result.one_step_residuals;
    write_series_csv(residuals_path, res);
  }
  for (const auto& w : result.warnings) std::cerr << "forecast warning: " << w << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsfit: multivariate time series estimation on overlapping partitions"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate an ARMA model to CSV");
  std::string sim_model, sim_out;
  std::int64_t sim_n = 1000, sim_burn = 1000;
  std::uint64_t sim_seed = 0;
  sim->add_option("--model", sim_model, "Model JSON")->required();
  sim->add_option("--n", sim_n, "Steps to emit")->required();
  sim->add_option("--burn-in", sim_burn, "Discarded warmup steps");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "Output CSV")->required();

  // diff
  auto* diff = app.add_subcommand("diff", "Difference a series");
  std::string diff_in, diff_out;
  int diff_order = 1;
  diff->add_option("--input", diff_in)->required();
  diff->add_option("--order", diff_order, "Differencing order");
  diff->add_option("--out", diff_out)->required();

  // acf
  auto* acf = app.add_subcommand("acf", "Autocorrelogram to JSON");
  std::string acf_in, acf_out;
  int acf_lag = 20;
  bool acf_joint = false;
  EngineFlags acf_flags;
  acf->add_option("--input", acf_in)->required();
  acf->add_option("--max-lag", acf_lag);
  acf->add_flag("--joint", acf_joint, "Single-pass joint estimator (biased normalization)");
  acf_flags.attach(acf);
  acf->add_option("--out", acf_out)->required();

  // pacf
  auto* pac = app.add_subcommand("pacf", "Partial autocorrelogram to JSON");
  std::string pacf_in, pacf_out;
  int pacf_p = 10;
  double pacf_ridge = 0.0;
  EngineFlags pacf_flags;
  pac->add_option("--input", pacf_in)->required();
  pac->add_option("--p-max", pacf_p);
  pac->add_option("--ridge", pacf_ridge, "Ridge added to the Toeplitz diagonal");
  pacf_flags.attach(pac);
  pac->add_option("--out", pacf_out)->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a model, write model JSON");
  std::string fit_in, fit_out;
  FitFlags fit_flags;
  EngineFlags fit_engine;
  fit->add_option("--input", fit_in)->required();
  fit->add_option("--method", fit_flags.method,
                  "yule-walker|durbin-levinson|innovations|arma|mle|banded");
  fit->add_option("--p", fit_flags.p, "AR order");
  fit->add_option("--q", fit_flags.q, "MA order");
  fit->add_option("--m-depth", fit_flags.m_depth, "Innovation recursion depth");
  fit->add_option("--step", fit_flags.step, "eigen|backtrack|fixed:ETA");
  fit->add_flag("--sgd", fit_flags.sgd, "Stochastic gradient (one term per step)");
  fit->add_option("--sgd-step0", fit_flags.sgd_step0, "SGD step0 in eta_t = step0/(1+t)");
  fit->add_option("--max-iters", fit_flags.max_iters);
  fit->add_option("--grad-tol", fit_flags.grad_tol);
  fit->add_option("--rounds", fit_flags.rounds, "(A, Sigma) alternation rounds");
  fit->add_option("--seed", fit_flags.seed, "SGD sampling seed");
  fit->add_flag("--warm-start", fit_flags.warm_start, "Yule-Walker warm start for mle");
  fit->add_option("--bandwidth", fit_flags.bandwidth, "Banded fit bandwidth");
  fit->add_option("--spatial-partitions", fit_flags.spatial_partitions,
                  "Spatial partitions for the banded fit");
  fit_engine.attach(fit);
  fit->add_option("--out", fit_out)->required();

  // forecast
  auto* fc = app.add_subcommand("forecast", "Forecast from a fitted model");
  std::string fc_model, fc_in, fc_out, fc_res;
  int fc_steps = 1;
  bool fc_one_step_all = false, fc_exact_warmup = false;
  fc->add_option("--model", fc_model)->required();
  fc->add_option("--input", fc_in)->required();
  fc->add_option("--steps", fc_steps, "Forecast horizon");
  fc->add_flag("--one-step-all", fc_one_step_all, "Emit one-step residuals for the whole series");
  fc->add_flag("--exact-warmup", fc_exact_warmup, "Innovation-weighted warmup");
  fc->add_option("--out", fc_out)->required();
  fc->add_option("--residuals-out", fc_res, "Residual CSV under --one-step-all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2, help exits 0
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_model, sim_n, sim_burn, sim_seed, sim_out);
    if (diff->parsed()) return cmd_diff(diff_in, diff_order, diff_out);
    if (acf->parsed()) return cmd_acf(acf_in, acf_lag, acf_joint, acf_flags, acf_out);
    if (pac->parsed()) return cmd_pacf(pacf_in, pacf_p, pacf_ridge, pacf_flags, pacf_out);
    if (fit->parsed()) return cmd_fit(fit_in, fit_flags, fit_engine, fit_out);
    if (fc->parsed())
      return cmd_forecast(fc_model, fc_in, fc_steps, fc_one_step_all, fc_exact_warmup, fc_out,
                          fc_res);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
