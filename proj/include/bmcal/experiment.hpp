#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "bmcal/model.hpp"
#include "bmcal/pool.hpp"
#include "bmcal/predict_eval.hpp"
#include "bmcal/sampler_finite.hpp"

namespace bmcal {

enum class RunMode { simulate, calibrate, evaluate, full_pipeline };
enum class Dgp { sim1, sim2, mar, none };
enum class ModelKind { nc, bm1, bmk, bminf };

std::string run_mode_name(RunMode m);
std::string dgp_name(Dgp d);
std::string model_kind_name(ModelKind m);

struct ExperimentConfig {
  RunMode mode = RunMode::full_pipeline;
  Dgp dgp = Dgp::none;
  ModelKind model = ModelKind::bminf;
  std::size_t K = 2;  // bmk mixture size

  std::array<double, 3> sim1_p{0.2, 0.2, 0.6};
  double mar_phi = 0.5;
  double mar_rho = -1.0;
  std::size_t T = 1000;

  // 0: fit once on the full series and evaluate in sample; -1: expanding
  // one-step-ahead refits; >= 10: rolling window of that length.
  long window = 0;

  Hyperparams hyper;
  McmcConfig mcmc;

  bool with_crps = false;
  std::size_t eval_draws = 1000;  // thinning target for PIT/score evaluation
  std::size_t crps_draws = 200;

  std::string out_dir = ".";
  std::string forecasts_path;  // input series when dgp = none
  std::string trace_path;      // input trace for evaluate mode

  void validate() const;  // throws ConfigError
};

// key = value lines, '#' comments; unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization; hashed into the run manifest.
std::string config_to_text(const ExperimentConfig& config);

struct RunResult {
  std::string model_name;
  EvalReport report;         // empty for simulate/calibrate runs
  long flagged_windows = 0;  // refits abandoned on numerical failure
};

RunResult run_experiment(const ExperimentConfig& config);

}  // namespace bmcal
