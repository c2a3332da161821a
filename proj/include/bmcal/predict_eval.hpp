#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bmcal/kernels.hpp"
#include "bmcal/model.hpp"
#include "bmcal/pool.hpp"
#include "bmcal/sampler_dp.hpp"
#include "bmcal/sampler_finite.hpp"

namespace bmcal {

// Floor for log predictive densities, just above log(DBL_MIN); clamped steps
// are counted so degenerate scores stay visible.
inline constexpr double kLogClamp = -745.0;

// Monte-Carlo average predictive distribution: an evaluation closure over the
// stored posterior draws and one component tuple.
class MixturePredictive {
 public:
  static MixturePredictive from_finite(const FiniteTrace& trace,
                                       std::span<const ComponentForecast> components);
  // Snapshot weights are renormalized to the stored mass (the truncation
  // residual is below the smallest slice level, so this is a < 1e-3 rescale).
  static MixturePredictive from_dp(const DPTrace& trace,
                                   std::span<const ComponentForecast> components);
  // Plug-in at the posterior-mean parameters, finite traces only.
  static MixturePredictive plugin_from_finite(const FiniteTrace& trace,
                                              std::span<const ComponentForecast> components);
  // The linear pool itself (identity calibration), used for the baseline.
  static MixturePredictive from_pool(const PoolWeights& w,
                                     std::span<const ComponentForecast> components);
  static MixturePredictive from_draws(std::span<const DrawParams> draws,
                                      std::span<const ComponentForecast> components);

  double cdf(double y) const;
  double pdf(double y) const;
  void cdf_grid(std::span<const double> ys, std::span<double> out) const;
  double quantile(double q) const;
  std::size_t draw_count() const { return draw_count_; }
  std::span<const MixtureEntry> entries() const { return entries_; }
  std::span<const ComponentForecast> components() const { return components_; }

 private:
  std::vector<MixtureEntry> entries_;
  std::vector<ComponentForecast> components_;
  std::size_t draw_count_ = 0;
};

std::vector<DrawParams> eval_draws_from(const FiniteTrace& trace);
std::vector<DrawParams> eval_draws_from(const DPTrace& trace);

// Keep roughly `target` evenly spaced draws.
std::vector<DrawParams> thin_draws(std::vector<DrawParams> draws,
                                   std::size_t target);

double predictive_cdf(const FiniteTrace& trace,
                      std::span<const ComponentForecast> components, double y);
double predictive_cdf(const DPTrace& trace,
                      std::span<const ComponentForecast> components, double y);

// Monte-Carlo average PIT of each observation under its own step tuple.
std::vector<double> compute_pits(std::span<const DrawParams> draws,
                                 const ForecastSeries& series);

struct PitBand {
  std::vector<double> grid;
  std::vector<double> lo;
  std::vector<double> hi;
};

// Pointwise band of the per-draw PIT empirical cdfs: at each grid point the
// (1 -/+ level)/2 quantiles across draws.
PitBand pit_band(std::span<const DrawParams> draws, const ForecastSeries& series,
                 std::span<const double> grid, double level);

// Average log predictive score; log of zero densities is clamped at -745 and
// each clamp counted.
double avg_log_score(std::span<const DrawParams> draws,
                     const ForecastSeries& series, long* clamp_count = nullptr);

// Continuous ranked probability score by composite Simpson between the 1e-6
// and 1-1e-6 predictive quantiles, split at y, 4097 nodes, plus substitution
// quadratures over both unbounded tails.
double crps(const MixturePredictive& predictive, double y);

// Kolmogorov-Smirnov distance of the PITs from uniformity and the 5%-level
// decision with the 1.358/sqrt(T) critical value.
struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool pass = false;
};
KsResult ks_uniformity(std::span<const double> pits);

// Recursive log-score weights: equal at t = 1, then proportional to the
// exponentiated cumulative log scores of each component.  Steps where every
// component density vanishes leave the weights unchanged and are counted.
std::vector<PoolWeights> recursive_logscore_weights(const ForecastSeries& series,
                                                    long* degenerate_steps = nullptr);

struct EvalReport {
  std::vector<double> pits;
  std::vector<double> log_scores;   // per-step log predictive density
  std::vector<double> crps_values;  // empty when disabled
  double avls = 0.0;
  double avcrps = 0.0;
  KsResult ks;
  PitBand band;  // empty grid when not computed
  long clamp_count = 0;
};

struct EvalOptions {
  bool band = true;
  double band_level = 0.99;
  std::size_t band_grid = 101;
  bool with_crps = false;
  std::size_t crps_draws = 200;  // thinning target for the CRPS quadrature
};

// Full report from one pass over the draw matrices: per-step PITs and log
// scores, KS decision, and optionally the PIT band and per-step CRPS.
EvalReport evaluate_draws(std::span<const DrawParams> draws,
                          const ForecastSeries& series,
                          const EvalOptions& opts = {});

}  // namespace bmcal
