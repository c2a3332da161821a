#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <stdexcept>
#include <vector>

#include "bmcal/errors.hpp"
#include "bmcal/predict_eval.hpp"
#include "bmcal/sampler_dp.hpp"
#include "bmcal/simulate.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bmcal;

namespace {

// Posterior mean of psi given the occupied count: density proportional to
// psi^(K+c-1) exp(-d psi) Gamma(psi) / Gamma(psi + T), by Simpson quadrature.
double psi_posterior_mean(int occupied, std::size_t T, double c, double d) {
  const long double lo = 1e-8L, hi = 30.0L;
  const std::size_t n = 4000;  // panels
  const long double h = (hi - lo) / n;
  long double z = 0.0L, m1 = 0.0L;
  for (std::size_t i = 0; i <= n; ++i) {
    const long double x = lo + h * static_cast<long double>(i);
    const long double lp = (occupied + c - 1.0L) * std::log(x) - d * x +
                           oracle::lgamma_ld(x) -
                           oracle::lgamma_ld(x + static_cast<long double>(T));
    const long double w = (i == 0 || i == n) ? 1.0L : (i % 2 == 1 ? 4.0L : 2.0L);
    const long double f = w * std::exp(lp + 180.0L);  // lift to avoid underflow
    z += f;
    m1 += f * x;
  }
  return static_cast<double>(m1 / z);
}

DPSnapshot hand_snapshot(std::vector<double> weights) {
  DPSnapshot snap;
  snap.weights = std::move(weights);
  snap.atoms.emplace_back(BetaMeanPrecision(0.3, 4.0), PoolWeights({0.8, 0.2}));
  snap.atoms.emplace_back(BetaMeanPrecision(0.6, 1.5), PoolWeights({0.1, 0.9}));
  snap.psi = 0.5;
  snap.n_occupied = 2;
  return snap;
}

std::vector<ComponentForecast> two_normals() {
  return {ComponentForecast::make_normal(-1.0, 1.0),
          ComponentForecast::make_normal(2.0, 1.0)};
}

}  // namespace

TEST_CASE("psi_gibbs_update leaves the concentration posterior invariant") {
  const int occupied = 5;
  const std::size_t T = 100;
  const double c = 2.0, d = 2.0;
  const double target = psi_posterior_mean(occupied, T, c, d);

  Rng rng(401);
  double psi = 1.0;
  for (int i = 0; i < 2000; ++i) psi = psi_gibbs_update(psi, occupied, T, c, d, rng);
  const std::size_t batches = 50, per = 1000;
  std::vector<double> bm(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < per; ++i) {
      psi = psi_gibbs_update(psi, occupied, T, c, d, rng);
      CHECK(psi > 0.0);
      bm[b] += psi;
    }
    bm[b] /= static_cast<double>(per);
  }
  double mean = 0.0;
  for (double v : bm) mean += v;
  mean /= static_cast<double>(batches);
  double se2 = 0.0;
  for (double v : bm) se2 += (v - mean) * (v - mean);
  const double se = std::sqrt(se2 / (batches * (batches - 1.0)));
  CHECK(std::fabs(mean - target) <= 4.0 * se + 1e-3);
}

TEST_CASE("slice sampler steps preserve the state invariants") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 50, 31);
  Hyperparams hyper;
  hyper.psi = PsiPrior::gamma(2.0, 2.0);
  McmcConfig config;
  config.seed = 5;

  DPSampler sampler(series, hyper, config);
  Rng rng(config.seed);
  sampler.seed_state(rng);
  CHECK_NOTHROW(sampler.check_state());
  CHECK(sampler.alloc().size() == 50);
  CHECK(sampler.stick_count() >= 1);

  for (int it = 0; it < 25; ++it) {
    sampler.update_atoms(rng);
    CHECK_NOTHROW(sampler.check_state());
    sampler.update_sticks_slices(rng);
    CHECK_NOTHROW(sampler.check_state());
    sampler.update_allocations(rng);
    CHECK_NOTHROW(sampler.check_state());
    sampler.update_psi(rng);
    CHECK_NOTHROW(sampler.check_state());

    const DPSnapshot snap = sampler.snapshot();
    CHECK(snap.weights.size() == sampler.stick_count());
    CHECK(snap.atoms.size() == sampler.stick_count());
    CHECK(snap.alloc == sampler.alloc());
    const std::set<int> distinct(snap.alloc.begin(), snap.alloc.end());
    CHECK(snap.n_occupied == static_cast<int>(distinct.size()));
    CHECK(snap.n_occupied == sampler.occupied_count());
  }
}

TEST_CASE("fixed psi is never moved and consumes no randomness") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 30, 37);
  Hyperparams hyper;
  hyper.psi = PsiPrior::fixed_at(0.7);
  McmcConfig config;

  DPSampler sampler(series, hyper, config);
  Rng rng(11);
  sampler.seed_state(rng);
  CHECK(sampler.psi() == 0.7);

  DPSampler twin(series, hyper, config);
  Rng rng_twin(11);
  twin.seed_state(rng_twin);
  sampler.update_psi(rng);
  CHECK(sampler.psi() == 0.7);
  CHECK(rng.raw() == rng_twin.raw());

  for (int it = 0; it < 10; ++it) sampler.sweep(rng);
  CHECK(sampler.psi() == 0.7);
}

TEST_CASE("stick budget overflow raises a numerical error") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 30, 41);
  Hyperparams hyper;
  hyper.psi = PsiPrior::fixed_at(50.0);
  McmcConfig config;
  config.max_sticks = 1;

  DPSampler sampler(series, hyper, config);
  Rng rng(3);
  CHECK_THROWS_AS(sampler.seed_state(rng), NumericalError);
  CHECK_THROWS_AS(run_slice_sampler(series, hyper, config), NumericalError);
}

TEST_CASE("run_slice_sampler returns a well-formed deterministic trace") {
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, 60, 43);
  Hyperparams hyper;
  hyper.psi = PsiPrior::gamma(2.0, 2.0);
  McmcConfig config;
  config.iterations = 120;
  config.burn_in = 80;
  config.seed = 13;

  const DPTrace trace = run_slice_sampler(series, hyper, config);
  CHECK(trace.M == 2);
  REQUIRE(trace.draws.size() == 120);
  CHECK(trace.cluster_counts.size() == 200);
  for (const DPSnapshot& snap : trace.draws) {
    REQUIRE(!snap.weights.empty());
    CHECK(snap.weights.size() == snap.atoms.size());
    CHECK(snap.alloc.size() == 60);
    double total = 0.0;
    for (double w : snap.weights) {
      CHECK(w > 0.0);
      CHECK(w < 1.0);
      total += w;
    }
    CHECK(total <= 1.0 + 1e-12);
    CHECK(snap.psi > 0.0);
    CHECK(snap.n_occupied >= 1);
    CHECK(snap.n_occupied <= static_cast<int>(snap.weights.size()));
  }
  for (int n : trace.cluster_counts) {
    CHECK(n >= 1);
    CHECK(n <= 60);
  }
  CHECK(trace.acc_mu_nu > 0.0);
  CHECK(trace.acc_mu_nu < 1.0);
  CHECK(trace.numeric_warnings == 0);

  const DPTrace again = run_slice_sampler(series, hyper, config);
  REQUIRE(again.draws.size() == trace.draws.size());
  for (std::size_t i = 0; i < trace.draws.size(); ++i) {
    CHECK(again.draws[i].psi == trace.draws[i].psi);
    CHECK(again.draws[i].alloc == trace.draws[i].alloc);
    CHECK(again.draws[i].weights == trace.draws[i].weights);
  }

  McmcConfig thinned = config;
  thinned.thin = 4;
  CHECK(run_slice_sampler(series, hyper, thinned).draws.size() == 30);
}

TEST_CASE("sample_predictive_dp matches the snapshot predictive cdf") {
  const DPSnapshot snap = hand_snapshot({0.7, 0.3});
  Hyperparams hyper;
  DPTrace trace;
  trace.M = 2;
  trace.hyper = hyper;
  trace.draws.push_back(snap);
  const std::vector<ComponentForecast> comps = two_normals();

  Rng rng(501);
  const std::size_t N = 30000;
  const std::vector<double> probes = {-2.0, -0.5, 0.5, 1.5, 3.0};
  std::vector<double> below(probes.size(), 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double y = sample_predictive_dp(snap, hyper, comps, rng);
    REQUIRE(std::isfinite(y));
    for (std::size_t j = 0; j < probes.size(); ++j) below[j] += y <= probes[j];
  }
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const double F = predictive_cdf(trace, comps, probes[j]);
    CHECK(std::fabs(below[j] / static_cast<double>(N) - F) <= 0.015);
  }
}

TEST_CASE("sample_predictive_dp extends the stick representation when needed") {
  // Stored mass 0.5: half the draws must come from fresh base-measure atoms.
  const DPSnapshot snap = hand_snapshot({0.35, 0.15});
  Hyperparams hyper;
  hyper.xi_nu = 2.0;  // moderate base-measure precisions
  const std::vector<ComponentForecast> comps = two_normals();

  Rng rng(503);
  std::vector<double> draws(4000);
  for (double& y : draws) {
    y = sample_predictive_dp(snap, hyper, comps, rng);
    REQUIRE(std::isfinite(y));
  }
  Rng rng2(503);
  for (double y : draws)
    CHECK(y == sample_predictive_dp(snap, hyper, comps, rng2));
}
