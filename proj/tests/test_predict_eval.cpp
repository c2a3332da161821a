#include <cmath>
#include <stdexcept>
#include <vector>

#include "bmcal/predict_eval.hpp"
#include "bmcal/simulate.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bmcal;

namespace {

std::vector<ComponentForecast> two_normals() {
  return {ComponentForecast::make_normal(-1.0, 1.0),
          ComponentForecast::make_normal(2.0, 1.0)};
}

std::vector<DrawParams> prior_draws(std::size_t n, std::size_t K, std::size_t M,
                                    std::uint64_t seed) {
  Hyperparams hyper;
  Rng rng(seed);
  std::vector<DrawParams> out;
  for (std::size_t i = 0; i < n; ++i) {
    FiniteParams p = prior_sample(hyper, K, M, rng);
    out.push_back({std::move(p.w), std::move(p.atoms)});
  }
  return out;
}

}  // namespace

TEST_CASE("crps of a single normal matches the closed form") {
  const std::vector<ComponentForecast> one = {
      ComponentForecast::make_normal(0.8, 1.7)};
  const MixturePredictive pred =
      MixturePredictive::from_pool(PoolWeights({1.0}), one);
  for (double y : {-3.0, 0.8, 1.3, 4.0, 9.5}) {
    const double expected = oracle::normal_crps(0.8, 1.7, y);
    CHECK(crps(pred, y) == doctest::Approx(expected).epsilon(1e-8).scale(1e-7));
  }
}

TEST_CASE("crps of a calibrated mixture matches direct quadrature") {
  const std::vector<ComponentForecast> comps = two_normals();
  std::vector<DrawParams> draws;
  draws.push_back({{0.7, 0.3},
                   {CalibrationAtom(BetaMeanPrecision(0.35, 3.0), PoolWeights({0.6, 0.4})),
                    CalibrationAtom(BetaMeanPrecision(0.6, 1.2), PoolWeights({0.2, 0.8}))}});
  draws.push_back({{0.5, 0.5},
                   {CalibrationAtom(BetaMeanPrecision(0.5, 2.0), PoolWeights({0.5, 0.5})),
                    CalibrationAtom(BetaMeanPrecision(0.72, 6.0), PoolWeights({0.9, 0.1}))}});
  const MixturePredictive pred = MixturePredictive::from_draws(draws, comps);
  for (double y : {-1.5, 0.4, 2.6}) {
    const double lo = pred.quantile(1e-9);
    const double hi = pred.quantile(1.0 - 1e-9);
    const double expected = oracle::crps_quadrature(
        [&](double z) { return pred.cdf(z); }, y, std::min(lo, y - 1.0),
        std::max(hi, y + 1.0));
    CHECK(crps(pred, y) == doctest::Approx(expected).epsilon(2e-6));
  }
}

TEST_CASE("predictive quantile round-trips through the cdf") {
  const std::vector<ComponentForecast> comps = two_normals();
  const MixturePredictive pred =
      MixturePredictive::from_pool(PoolWeights({0.5, 0.5}), comps);
  for (double q : {1e-6, 1e-3, 0.21, 0.5, 0.87, 1.0 - 1e-3, 1.0 - 1e-6}) {
    const double y = pred.quantile(q);
    CHECK(std::fabs(pred.cdf(y) - q) <= 2e-10);
  }
  CHECK_THROWS_AS(pred.quantile(0.0), std::domain_error);
  CHECK_THROWS_AS(pred.quantile(1.0), std::domain_error);
}

TEST_CASE("compute_pits equals the per-step predictive cdf") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 30, 5);
  const std::vector<DrawParams> draws = prior_draws(12, 2, 2, 6);
  const std::vector<double> pits = compute_pits(draws, series);
  REQUIRE(pits.size() == series.size());
  for (std::size_t t = 0; t < series.size(); t += 5) {
    const MixturePredictive pred =
        MixturePredictive::from_draws(draws, series.steps[t].components);
    CHECK(pits[t] == doctest::Approx(pred.cdf(series.steps[t].y)).epsilon(1e-13));
    CHECK(pits[t] >= 0.0);
    CHECK(pits[t] <= 1.0);
  }
}

TEST_CASE("avg_log_score averages the log predictive density and clamps zeros") {
  ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 25, 8);
  const std::vector<DrawParams> draws = prior_draws(10, 2, 2, 9);
  long clamps = -1;
  const double avls = avg_log_score(draws, series, &clamps);
  CHECK(clamps == 0);
  double expected = 0.0;
  for (const ForecastStep& step : series.steps) {
    const MixturePredictive pred =
        MixturePredictive::from_draws(draws, step.components);
    expected += std::log(pred.pdf(step.y));
  }
  expected /= static_cast<double>(series.size());
  CHECK(avls == doctest::Approx(expected).epsilon(1e-10));

  // A grid component with bounded support forces zero density off it.
  ForecastSeries degen;
  ForecastStep step;
  step.components = {ComponentForecast::make_grid({0.0, 1.0}, {0.0, 1.0}),
                     ComponentForecast::make_grid({0.0, 1.0}, {0.0, 1.0})};
  step.y = 5.0;
  degen.steps.push_back(step);
  long dc = 0;
  const double davls = avg_log_score(draws, degen, &dc);
  CHECK(dc == 1);
  CHECK(davls == doctest::Approx(kLogClamp));
}

TEST_CASE("pit band bounds are ordered quantiles over draws") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 50, 21);
  const std::vector<DrawParams> draws = prior_draws(30, 2, 2, 22);
  std::vector<double> grid;
  for (int g = 0; g <= 20; ++g) grid.push_back(g / 20.0);
  const PitBand band = pit_band(draws, series, grid, 0.9);
  REQUIRE(band.grid.size() == grid.size());
  REQUIRE(band.lo.size() == grid.size());
  REQUIRE(band.hi.size() == grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(band.lo[g] <= band.hi[g]);
    CHECK(band.lo[g] >= 0.0);
    CHECK(band.hi[g] <= 1.0);
    if (g > 0) {
      CHECK(band.lo[g] >= band.lo[g - 1] - 1e-12);
      CHECK(band.hi[g] >= band.hi[g - 1] - 1e-12);
    }
  }
  CHECK(band.lo.front() == 0.0);
  CHECK(band.hi.back() == doctest::Approx(1.0));
  // A wider level never tightens the band.
  const PitBand wide = pit_band(draws, series, grid, 0.99);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    CHECK(wide.lo[g] <= band.lo[g] + 1e-12);
    CHECK(wide.hi[g] >= band.hi[g] - 1e-12);
  }
}

TEST_CASE("ks_uniformity on hand-built samples") {
  // Ideal midpoints: D = 1/(2n).
  std::vector<double> mid;
  const std::size_t n = 100;
  for (std::size_t i = 0; i < n; ++i)
    mid.push_back((static_cast<double>(i) + 0.5) / n);
  const KsResult ideal = ks_uniformity(mid);
  CHECK(ideal.statistic == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(ideal.critical == doctest::Approx(1.358 / 10.0).epsilon(1e-12));
  CHECK(ideal.pass);

  // Point mass at 0.9: D = 0.9.
  const std::vector<double> lump(50, 0.9);
  const KsResult bad = ks_uniformity(lump);
  CHECK(bad.statistic == doctest::Approx(0.9).epsilon(1e-12));
  CHECK_FALSE(bad.pass);
}

TEST_CASE("recursive log-score weights follow the likelihood recursion") {
  ForecastSeries series;
  for (double y : {0.2, -1.5, 2.4}) {
    ForecastStep step;
    step.components = two_normals();
    step.y = y;
    series.steps.push_back(std::move(step));
  }
  const std::vector<PoolWeights> w = recursive_logscore_weights(series);
  REQUIRE(w.size() == 3);
  CHECK(w[0][0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(w[0][1] == doctest::Approx(0.5).epsilon(1e-14));
  // Weight used at step t reflects scores up to t-1.
  const double f10 = oracle::normal_pdf(0.2 + 1.0);
  const double f20 = oracle::normal_pdf(0.2 - 2.0);
  CHECK(w[1][0] == doctest::Approx(f10 / (f10 + f20)).epsilon(1e-12));
  const double f11 = f10 * oracle::normal_pdf(-1.5 + 1.0);
  const double f21 = f20 * oracle::normal_pdf(-1.5 - 2.0);
  CHECK(w[2][0] == doctest::Approx(f11 / (f11 + f21)).epsilon(1e-12));

  // Degenerate step: zero density for every component carries weights over.
  ForecastSeries degen;
  ForecastStep step;
  step.components = {ComponentForecast::make_grid({0.0, 1.0}, {0.0, 1.0}),
                     ComponentForecast::make_grid({2.0, 3.0}, {0.0, 1.0})};
  step.y = 10.0;
  degen.steps.push_back(step);
  degen.steps.push_back(step);
  long degenerate = 0;
  const std::vector<PoolWeights> dw = recursive_logscore_weights(degen, &degenerate);
  CHECK(degenerate == 2);
  CHECK(dw[1][0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("evaluate_draws ties the pieces together") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 60, 31);
  const std::vector<DrawParams> draws = prior_draws(20, 2, 2, 32);
  EvalOptions opts;
  opts.with_crps = true;
  opts.crps_draws = 10;
  const EvalReport rep = evaluate_draws(draws, series, opts);
  REQUIRE(rep.pits.size() == series.size());
  REQUIRE(rep.log_scores.size() == series.size());
  REQUIRE(rep.crps_values.size() == series.size());
  CHECK(rep.pits == compute_pits(draws, series));
  long clamps = 0;
  CHECK(rep.avls == doctest::Approx(avg_log_score(draws, series, &clamps)).epsilon(1e-12));
  CHECK(rep.clamp_count == clamps);
  const KsResult ks = ks_uniformity(rep.pits);
  CHECK(rep.ks.statistic == doctest::Approx(ks.statistic).epsilon(1e-14));
  CHECK(rep.ks.pass == ks.pass);
  double mean_crps = 0.0;
  for (double c : rep.crps_values) {
    CHECK(c > 0.0);
    mean_crps += c;
  }
  CHECK(rep.avcrps == doctest::Approx(mean_crps / series.size()).epsilon(1e-12));
  REQUIRE(rep.band.grid.size() == 101);

  EvalOptions no_band;
  no_band.band = false;
  const EvalReport bare = evaluate_draws(draws, series, no_band);
  CHECK(bare.band.grid.empty());
  CHECK(bare.crps_values.empty());
  CHECK(bare.avcrps == 0.0);
}

TEST_CASE("thin_draws keeps evenly spaced posterior draws") {
  std::vector<DrawParams> draws = prior_draws(100, 1, 2, 55);
  const std::vector<DrawParams> all = thin_draws(draws, 0);
  CHECK(all.size() == 100);
  const std::vector<DrawParams> same = thin_draws(draws, 200);
  CHECK(same.size() == 100);
  const std::vector<DrawParams> thin = thin_draws(draws, 25);
  REQUIRE(thin.size() == 25);
  CHECK(thin[0].w == draws[0].w);
  CHECK(thin[1].w == draws[4].w);
  CHECK(thin[24].w == draws[96].w);
}

TEST_CASE("predictive builders agree across trace representations") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 40, 71);
  McmcConfig cfg;
  cfg.iterations = 60;
  cfg.burn_in = 40;
  cfg.seed = 5;
  const FiniteTrace trace = run_finite_gibbs(series, 2, Hyperparams{}, cfg);
  const auto& comps = series.steps[0].components;
  const MixturePredictive a = MixturePredictive::from_finite(trace, comps);
  const std::vector<DrawParams> draws = eval_draws_from(trace);
  const MixturePredictive b = MixturePredictive::from_draws(draws, comps);
  for (double y : {-2.0, 0.5, 3.0}) {
    CHECK(a.cdf(y) == doctest::Approx(b.cdf(y)).epsilon(1e-14));
    CHECK(predictive_cdf(trace, comps, y) == doctest::Approx(a.cdf(y)).epsilon(1e-14));
  }
  CHECK(a.draw_count() == trace.draws.size());

  // DP snapshots renormalize the truncated stick mass.
  DPTrace dp;
  dp.M = 2;
  DPSnapshot snap;
  snap.weights = {0.6, 0.3};  // deliberately short of one
  snap.atoms.emplace_back(BetaMeanPrecision(0.4, 2.0), PoolWeights({0.5, 0.5}));
  snap.atoms.emplace_back(BetaMeanPrecision(0.6, 3.0), PoolWeights({0.2, 0.8}));
  snap.alloc = {0};
  snap.psi = 1.0;
  snap.n_occupied = 2;
  dp.draws.push_back(snap);
  const MixturePredictive dpred = MixturePredictive::from_dp(dp, comps);
  CHECK(dpred.cdf(80.0) == doctest::Approx(1.0).epsilon(1e-9));
  double wsum = 0.0;
  for (const MixtureEntry& e : dpred.entries()) wsum += e.weight;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
}
