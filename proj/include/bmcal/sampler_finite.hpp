#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bmcal/model.hpp"
#include "bmcal/pool.hpp"
#include "bmcal/rng.hpp"

namespace bmcal {

struct McmcConfig {
  long iterations = 10000;  // stored sweeps after burn-in
  long burn_in = 5000;
  long thin = 1;
  std::uint64_t seed = 1;
  // Random-walk proposal covariance for (logit mu, log nu) is
  // rw_scale_mu_nu * I2; rw_scales_k1 are the diagonal covariance entries of
  // the K=1 joint walk on (logit mu, log nu, alr omega).
  double rw_scale_mu_nu = 0.05;
  std::array<double, 3> rw_scales_k1{0.1, 0.05, 0.1};
  long max_sticks = 10000;

  void validate() const;
};

struct FiniteTrace {
  std::size_t K = 0;
  std::size_t M = 0;
  Hyperparams hyper;
  McmcConfig config;
  std::vector<FiniteParams> draws;
  std::vector<std::vector<int>> occupancy;  // cluster sizes per stored draw
  double acc_mu_nu = 0.0;
  double acc_omega = 0.0;
  double acc_global = 0.0;  // K=1 joint walk
  long numeric_warnings = 0;
};

namespace detail {

// Per-cluster log values of the pooled cdf/pdf at the observations; depends
// on omega_k only, so (mu, nu) moves never touch it.
struct ClusterCache {
  std::vector<double> logH;
  std::vector<double> log1mH;
  std::vector<double> logh;
};

void refresh_cluster_cache(ClusterCache& cache, const SeriesEval& se,
                           const PoolWeights& omega);

// sum_{t in members} log b*(H_t | mu, nu) off the cached columns.
double atom_log_lik(const BetaMeanPrecision& cal, const ClusterCache& cache,
                    std::span<const int> members);

// One random-walk MH update of (mu, nu) on the (logit, log) scale against the
// prior Be(xi_mu, xi_mu) x Ga(nu_shape, nu_rate); the transform Jacobian
// mu(1-mu)nu enters the target.
bool mh_mu_nu(BetaMeanPrecision& cal, const ClusterCache& cache,
              std::span<const int> members, double xi_mu, double nu_shape,
              double nu_rate, double rw_cov, Rng& rng);

// Independence MH on omega_k with the Dir(xi_omega) prior as proposal; the
// acceptance ratio reduces to the product of kernel ratios over members.
// Refreshes the cache column on acceptance.
bool mh_omega(CalibrationAtom& atom, ClusterCache& cache, const SeriesEval& se,
              std::span<const int> members, double xi_omega, Rng& rng);

}  // namespace detail

// Unnormalized log allocation probabilities of observation t over clusters.
std::vector<double> allocation_log_probs(const FiniteParams& params,
                                         const SeriesEval& se, std::size_t t);

// Gibbs draw of all allocations; falls back to a uniform draw (and counts a
// warning) when every cluster has zero posterior mass at some t.
Allocation step_allocations(const FiniteParams& params, const SeriesEval& se,
                            Rng& rng, long* warnings = nullptr);

// MH sweep over the (mu_k, nu_k) blocks; returns the number accepted.
int step_mu_nu(FiniteParams& params, const Allocation& alloc,
               const SeriesEval& se, const Hyperparams& hyper, double rw_cov,
               Rng& rng);

// MH sweep over the omega_k blocks; returns the number accepted.
int step_omega(FiniteParams& params, const Allocation& alloc,
               const SeriesEval& se, const Hyperparams& hyper, Rng& rng);

// Conjugate Dirichlet draw of the mixture weights.
std::vector<double> step_weights(const Allocation& alloc, std::size_t K,
                                 double xi_w, Rng& rng);

FiniteTrace run_finite_gibbs(const ForecastSeries& series, std::size_t K,
                             const Hyperparams& hyper, const McmcConfig& config);

// Joint random-walk MH for the single-component model, all parameters moved
// in one block on the unconstrained scale.
FiniteTrace run_global_mh_k1(const ForecastSeries& series,
                             const Hyperparams& hyper, const McmcConfig& config);

// Generative draw from the finite model at fixed parameters.
double sample_bmk(const FiniteParams& params,
                  std::span<const ComponentForecast> components, Rng& rng);

}  // namespace bmcal
