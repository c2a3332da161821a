#include "bmcal/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

#include "bmcal/errors.hpp"
#include "bmcal/io.hpp"
#include "bmcal/rng.hpp"
#include "bmcal/sampler_dp.hpp"
#include "bmcal/simulate.hpp"

namespace bmcal {

namespace fs = std::filesystem;

namespace {

constexpr long kMinTrain = 10;  // first expanding-window fit size

int log_level() {
  const char* env = std::getenv("BMCAL_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet" || v == "0") return 0;
  if (v == "debug" || v == "2") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[bmcal] " << msg << '\n';
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

long to_long(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

bool to_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<double> to_double_list(const std::string& value,
                                   const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(to_double(trim(item), key));
  return out;
}

PsiPrior parse_psi(const std::string& value) {
  if (value.rfind("gamma(", 0) == 0 && value.back() == ')') {
    const auto inner = to_double_list(value.substr(6, value.size() - 7), "psi");
    if (inner.size() != 2)
      throw ConfigError("key 'psi': gamma prior needs two parameters");
    return PsiPrior::gamma(inner[0], inner[1]);
  }
  return PsiPrior::fixed_at(to_double(value, "psi"));
}

void apply_key(ExperimentConfig& c, const std::string& key,
               const std::string& value) {
  if (key == "mode") {
    if (value == "simulate") c.mode = RunMode::simulate;
    else if (value == "calibrate" || value == "fit") c.mode = RunMode::calibrate;
    else if (value == "evaluate") c.mode = RunMode::evaluate;
    else if (value == "full_pipeline" || value == "full-pipeline" ||
             value == "pipeline") c.mode = RunMode::full_pipeline;
    else throw ConfigError("key 'mode': unknown value '" + value + "'");
  } else if (key == "dgp") {
    if (value == "sim1") c.dgp = Dgp::sim1;
    else if (value == "sim2") c.dgp = Dgp::sim2;
    else if (value == "mar") c.dgp = Dgp::mar;
    else if (value == "none") c.dgp = Dgp::none;
    else throw ConfigError("key 'dgp': unknown value '" + value + "'");
  } else if (key == "model") {
    if (value == "nc") c.model = ModelKind::nc;
    else if (value == "bm1") c.model = ModelKind::bm1;
    else if (value == "bmk") c.model = ModelKind::bmk;
    else if (value == "bminf") c.model = ModelKind::bminf;
    else throw ConfigError("key 'model': unknown value '" + value + "'");
  } else if (key == "K") {
    c.K = static_cast<std::size_t>(to_long(value, key));
  } else if (key == "sim1_p") {
    const auto p = to_double_list(value, key);
    if (p.size() != 3)
      throw ConfigError("key 'sim1_p': expected three probabilities");
    std::copy(p.begin(), p.end(), c.sim1_p.begin());
  } else if (key == "phi") {
    c.mar_phi = to_double(value, key);
  } else if (key == "rho") {
    c.mar_rho = to_double(value, key);
  } else if (key == "T") {
    c.T = static_cast<std::size_t>(to_long(value, key));
  } else if (key == "window") {
    if (value == "in_sample" || value == "in-sample") c.window = 0;
    else if (value == "expanding") c.window = -1;
    else c.window = to_long(value, key);
  } else if (key == "seed") {
    c.mcmc.seed = static_cast<std::uint64_t>(to_long(value, key));
  } else if (key == "iterations") {
    c.mcmc.iterations = to_long(value, key);
  } else if (key == "burn_in") {
    c.mcmc.burn_in = to_long(value, key);
  } else if (key == "thin") {
    c.mcmc.thin = to_long(value, key);
  } else if (key == "rw_scale_mu_nu") {
    c.mcmc.rw_scale_mu_nu = to_double(value, key);
  } else if (key == "max_sticks") {
    c.mcmc.max_sticks = to_long(value, key);
  } else if (key == "xi_w") {
    c.hyper.xi_w = to_double(value, key);
  } else if (key == "xi_mu") {
    c.hyper.xi_mu = to_double(value, key);
  } else if (key == "xi_nu") {
    c.hyper.xi_nu = to_double(value, key);
  } else if (key == "xi_omega") {
    c.hyper.xi_omega = to_double(value, key);
  } else if (key == "psi") {
    c.hyper.psi = parse_psi(value);
  } else if (key == "crps") {
    c.with_crps = to_bool(value, key);
  } else if (key == "eval_draws") {
    c.eval_draws = static_cast<std::size_t>(to_long(value, key));
  } else if (key == "crps_draws") {
    c.crps_draws = static_cast<std::size_t>(to_long(value, key));
  } else if (key == "out_dir") {
    c.out_dir = value;
  } else if (key == "forecasts") {
    c.forecasts_path = value;
  } else if (key == "trace") {
    c.trace_path = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

std::string run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::simulate: return "simulate";
    case RunMode::calibrate: return "calibrate";
    case RunMode::evaluate: return "evaluate";
    case RunMode::full_pipeline: return "full_pipeline";
  }
  return "?";
}

std::string dgp_name(Dgp d) {
  switch (d) {
    case Dgp::sim1: return "sim1";
    case Dgp::sim2: return "sim2";
    case Dgp::mar: return "mar";
    case Dgp::none: return "none";
  }
  return "?";
}

std::string model_kind_name(ModelKind m) {
  switch (m) {
    case ModelKind::nc: return "nc";
    case ModelKind::bm1: return "bm1";
    case ModelKind::bmk: return "bmk";
    case ModelKind::bminf: return "bminf";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (window != 0 && window != -1 && window < kMinTrain)
    throw ConfigError("window must be 0 (in-sample), -1 (expanding), or >= " +
                      std::to_string(kMinTrain) + " (rolling)");
  if (mode == RunMode::simulate && dgp == Dgp::none)
    throw ConfigError("mode simulate requires a dgp");
  if (mode != RunMode::simulate && dgp == Dgp::none && forecasts_path.empty())
    throw ConfigError("set dgp or forecasts for mode " + run_mode_name(mode));
  if (mode == RunMode::calibrate && model == ModelKind::nc)
    throw ConfigError("model nc has no calibration stage; use evaluate or full_pipeline");
  if (mode == RunMode::evaluate && model != ModelKind::nc && trace_path.empty())
    throw ConfigError("mode evaluate requires a trace for model " +
                      model_kind_name(model));
  if ((mode == RunMode::calibrate || mode == RunMode::evaluate) && window != 0)
    throw ConfigError("window refits require mode full_pipeline");
  if (model == ModelKind::bmk && K < 1)
    throw ConfigError("K must be at least 1");
  if (dgp != Dgp::none && T < 1) throw ConfigError("T must be positive");
  if (dgp == Dgp::sim1) {
    double sum = 0.0;
    for (double v : sim1_p) {
      if (v < 0.0) throw ConfigError("sim1_p entries must be nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw ConfigError("sim1_p must sum to one");
  }
  if (mcmc.iterations < 1 || mcmc.burn_in < 0 || mcmc.thin < 1)
    throw ConfigError("mcmc settings: iterations >= 1, burn_in >= 0, thin >= 1");
  if (eval_draws < 1 || crps_draws < 1)
    throw ConfigError("eval_draws and crps_draws must be positive");
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig config;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + " line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_key(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "mode = " << run_mode_name(c.mode) << '\n';
  out << "dgp = " << dgp_name(c.dgp) << '\n';
  out << "model = " << model_kind_name(c.model) << '\n';
  out << "K = " << c.K << '\n';
  out << "sim1_p = " << c.sim1_p[0] << ", " << c.sim1_p[1] << ", "
      << c.sim1_p[2] << '\n';
  out << "phi = " << c.mar_phi << '\n';
  out << "rho = " << c.mar_rho << '\n';
  out << "T = " << c.T << '\n';
  out << "window = " << c.window << '\n';
  out << "seed = " << c.mcmc.seed << '\n';
  out << "iterations = " << c.mcmc.iterations << '\n';
  out << "burn_in = " << c.mcmc.burn_in << '\n';
  out << "thin = " << c.mcmc.thin << '\n';
  out << "rw_scale_mu_nu = " << c.mcmc.rw_scale_mu_nu << '\n';
  out << "max_sticks = " << c.mcmc.max_sticks << '\n';
  out << "xi_w = " << c.hyper.xi_w << '\n';
  out << "xi_mu = " << c.hyper.xi_mu << '\n';
  out << "xi_nu = " << c.hyper.xi_nu << '\n';
  out << "xi_omega = " << c.hyper.xi_omega << '\n';
  if (c.hyper.psi.fixed)
    out << "psi = " << c.hyper.psi.value << '\n';
  else
    out << "psi = gamma(" << c.hyper.psi.c << ", " << c.hyper.psi.d << ")\n";
  out << "crps = " << (c.with_crps ? "true" : "false") << '\n';
  out << "eval_draws = " << c.eval_draws << '\n';
  out << "crps_draws = " << c.crps_draws << '\n';
  out << "out_dir = " << c.out_dir << '\n';
  if (!c.forecasts_path.empty()) out << "forecasts = " << c.forecasts_path << '\n';
  if (!c.trace_path.empty()) out << "trace = " << c.trace_path << '\n';
  return out.str();
}

namespace {

ForecastSeries obtain_series(const ExperimentConfig& config) {
  const std::uint64_t seed = Rng::derive_seed(config.mcmc.seed, 1);
  switch (config.dgp) {
    case Dgp::sim1: return generate_sim1(config.sim1_p, config.T, seed);
    case Dgp::sim2: return generate_sim2(config.T, seed);
    case Dgp::mar:
      return generate_mar(config.mar_phi, config.mar_rho, config.T, seed);
    case Dgp::none: return load_forecast_jsonl(config.forecasts_path);
  }
  throw ConfigError("unreachable dgp");
}

LoadedTrace fit_model(const ForecastSeries& series,
                      const ExperimentConfig& config, std::uint64_t seed) {
  McmcConfig mcmc = config.mcmc;
  mcmc.seed = seed;
  switch (config.model) {
    case ModelKind::bm1: return run_global_mh_k1(series, config.hyper, mcmc);
    case ModelKind::bmk:
      return run_finite_gibbs(series, config.K, config.hyper, mcmc);
    case ModelKind::bminf: return run_slice_sampler(series, config.hyper, mcmc);
    case ModelKind::nc: break;
  }
  throw ConfigError("model nc has no sampling stage");
}

std::vector<DrawParams> draws_of(const LoadedTrace& trace) {
  return std::visit([](const auto& t) { return eval_draws_from(t); }, trace);
}

std::size_t components_of(const LoadedTrace& trace) {
  return std::visit([](const auto& t) { return t.M; }, trace);
}

void save_trace_of(const LoadedTrace& trace, const std::string& path) {
  std::visit([&](const auto& t) { save_trace_jsonl(t, path); }, trace);
}

double clamped_log(double density, long* clamps) {
  if (density > 0.0) {
    const double ls = std::log(density);
    if (ls >= kLogClamp) return ls;
  }
  ++*clamps;
  return kLogClamp;
}

void finalize_report(EvalReport& report) {
  double ls = 0.0;
  for (double v : report.log_scores) ls += v;
  report.avls = ls / static_cast<double>(report.log_scores.size());
  if (!report.crps_values.empty()) {
    double cs = 0.0;
    for (double v : report.crps_values) cs += v;
    report.avcrps = cs / static_cast<double>(report.crps_values.size());
  }
  report.ks = ks_uniformity(report.pits);
}

EvalReport nc_report(const ForecastSeries& series, std::size_t start,
                     bool with_crps) {
  const auto weights = recursive_logscore_weights(series);
  EvalReport report;
  for (std::size_t t = start; t < series.size(); ++t) {
    const auto& comps = series.steps[t].components;
    const MixturePredictive pred =
        MixturePredictive::from_pool(weights[t], comps);
    const double y = series.steps[t].y;
    report.pits.push_back(pred.cdf(y));
    report.log_scores.push_back(clamped_log(pred.pdf(y), &report.clamp_count));
    if (with_crps) report.crps_values.push_back(crps(pred, y));
  }
  finalize_report(report);
  return report;
}

EvalReport in_sample_report(const LoadedTrace& trace,
                            const ForecastSeries& series,
                            const ExperimentConfig& config) {
  const auto draws = thin_draws(draws_of(trace), config.eval_draws);
  EvalOptions opts;
  opts.with_crps = config.with_crps;
  opts.crps_draws = config.crps_draws;
  return evaluate_draws(draws, series, opts);
}

EvalReport window_report(const ForecastSeries& series,
                         const ExperimentConfig& config, long* flagged) {
  const long T = static_cast<long>(series.size());
  const long start = config.window > 0 ? config.window : kMinTrain;
  if (start >= T)
    throw ConfigError("window leaves no steps to evaluate (T = " +
                      std::to_string(T) + ")");
  EvalReport report;
  for (long t = start; t < T; ++t) {
    const long lo = config.window > 0 ? t - config.window : 0;
    ForecastSeries train;
    train.steps.assign(series.steps.begin() + lo, series.steps.begin() + t);
    const std::uint64_t seed =
        Rng::derive_seed(config.mcmc.seed, 1000 + static_cast<std::uint64_t>(t));
    try {
      const LoadedTrace trace = fit_model(train, config, seed);
      const auto draws = thin_draws(draws_of(trace), config.eval_draws);
      const auto& comps = series.steps[t].components;
      const MixturePredictive pred =
          MixturePredictive::from_draws(draws, comps);
      const double y = series.steps[t].y;
      report.pits.push_back(pred.cdf(y));
      report.log_scores.push_back(
          clamped_log(pred.pdf(y), &report.clamp_count));
      if (config.with_crps) {
        const MixturePredictive pred_crps = MixturePredictive::from_draws(
            thin_draws(draws, config.crps_draws), comps);
        report.crps_values.push_back(crps(pred_crps, y));
      }
    } catch (const NumericalError& e) {
      ++*flagged;
      log_info("window ending at step " + std::to_string(t + 1) +
               " abandoned: " + e.what());
      continue;
    }
    if (log_level() >= 2 && (t - start) % 50 == 0)
      log_info("window " + std::to_string(t - start + 1) + "/" +
               std::to_string(T - start));
  }
  if (report.pits.empty())
    throw NumericalError("every window refit failed");
  finalize_report(report);
  return report;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);

  RunResult result;
  result.model_name = model_kind_name(config.model);

  const ForecastSeries series = obtain_series(config);
  log_info(run_mode_name(config.mode) + ": " + std::to_string(series.size()) +
           " steps, " + std::to_string(series.components_per_step()) +
           " components, model " + result.model_name);

  if (config.mode == RunMode::simulate || config.dgp != Dgp::none)
    save_forecast_jsonl(series, (out / "forecasts.jsonl").string());
  if (config.mode == RunMode::simulate) {
    save_manifest((out / "manifest.json").string(), config_to_text(config),
                  config.mcmc.seed, run_mode_name(config.mode));
    return result;
  }

  if (config.mode == RunMode::calibrate) {
    const LoadedTrace trace = fit_model(series, config, config.mcmc.seed);
    save_trace_of(trace, (out / "trace.jsonl").string());
    save_manifest((out / "manifest.json").string(), config_to_text(config),
                  config.mcmc.seed, run_mode_name(config.mode));
    return result;
  }

  if (config.mode == RunMode::evaluate) {
    if (config.model == ModelKind::nc) {
      result.report = nc_report(series, 0, config.with_crps);
    } else {
      const LoadedTrace trace = load_trace_jsonl(config.trace_path);
      if (components_of(trace) != series.components_per_step())
        throw ParseError("trace '" + config.trace_path + "' has " +
                         std::to_string(components_of(trace)) +
                         " components but the series has " +
                         std::to_string(series.components_per_step()));
      result.report = in_sample_report(trace, series, config);
    }
  } else if (config.window == 0) {
    if (config.model == ModelKind::nc) {
      result.report = nc_report(series, 0, config.with_crps);
    } else {
      const LoadedTrace trace = fit_model(series, config, config.mcmc.seed);
      save_trace_of(trace, (out / "trace.jsonl").string());
      result.report = in_sample_report(trace, series, config);
    }
  } else if (config.model == ModelKind::nc) {
    const std::size_t start =
        config.window > 0 ? static_cast<std::size_t>(config.window) : kMinTrain;
    if (start >= series.size())
      throw ConfigError("window leaves no steps to evaluate (T = " +
                        std::to_string(series.size()) + ")");
    result.report = nc_report(series, start, config.with_crps);
  } else {
    result.report = window_report(series, config, &result.flagged_windows);
  }

  save_report_csv(result.report, (out / "report.csv").string());
  save_summary_json(result.report, (out / "summary.json").string(),
                    result.model_name);
  save_manifest((out / "manifest.json").string(), config_to_text(config),
                config.mcmc.seed, run_mode_name(config.mode));

  std::ostringstream msg;
  msg.precision(6);
  msg << "AvLS " << result.report.avls << ", KS "
      << result.report.ks.statistic << (result.report.ks.pass ? " (pass)" : " (fail)");
  if (!result.report.crps_values.empty())
    msg << ", AvCRPS " << result.report.avcrps;
  if (result.flagged_windows > 0)
    msg << ", " << result.flagged_windows << " windows flagged";
  log_info(msg.str());
  return result;
}

}  // namespace bmcal
