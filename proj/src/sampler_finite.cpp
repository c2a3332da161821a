#include "bmcal/sampler_finite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bmcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Floored log keeps MH deltas finite when a pool cdf or survival rounds to 0.
double log_floor(double x) {
  return std::log(std::max(x, std::numeric_limits<double>::min()));
}

double logit(double p) { return std::log(p) - std::log1p(-p); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_beta_fn(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

std::vector<std::vector<int>> member_lists(std::span<const int> alloc,
                                           std::size_t K) {
  std::vector<std::vector<int>> members(K);
  for (std::size_t t = 0; t < alloc.size(); ++t)
    members[static_cast<std::size_t>(alloc[t])].push_back(static_cast<int>(t));
  return members;
}

}  // namespace

void McmcConfig::validate() const {
  if (iterations < 1) throw std::domain_error("McmcConfig: iterations must be >= 1");
  if (burn_in < 0) throw std::domain_error("McmcConfig: burn_in must be >= 0");
  if (thin < 1) throw std::domain_error("McmcConfig: thin must be >= 1");
  if (!(rw_scale_mu_nu > 0.0))
    throw std::domain_error("McmcConfig: rw_scale_mu_nu must be positive");
  for (double s : rw_scales_k1)
    if (!(s > 0.0))
      throw std::domain_error("McmcConfig: rw_scales_k1 must be positive");
  if (max_sticks < 1) throw std::domain_error("McmcConfig: max_sticks must be >= 1");
}

namespace detail {

void refresh_cluster_cache(ClusterCache& cache, const SeriesEval& se,
                           const PoolWeights& omega) {
  cache.logH.resize(se.T);
  cache.log1mH.resize(se.T);
  cache.logh.resize(se.T);
  for (std::size_t t = 0; t < se.T; ++t) {
    const double h = se.h(t, omega);
    cache.logH[t] = log_floor(se.H(t, omega));
    cache.log1mH[t] = log_floor(se.S(t, omega));
    cache.logh[t] = h > 0.0 ? std::log(h) : kNegInf;
  }
}

double atom_log_lik(const BetaMeanPrecision& cal, const ClusterCache& cache,
                    std::span<const int> members) {
  const double a = cal.alpha();
  const double b = cal.beta();
  double sH = 0.0, s1mH = 0.0;
  for (int t : members) {
    sH += cache.logH[static_cast<std::size_t>(t)];
    s1mH += cache.log1mH[static_cast<std::size_t>(t)];
  }
  return (a - 1.0) * sH + (b - 1.0) * s1mH -
         static_cast<double>(members.size()) * log_beta_fn(a, b);
}

bool mh_mu_nu(BetaMeanPrecision& cal, const ClusterCache& cache,
              std::span<const int> members, double xi_mu, double nu_shape,
              double nu_rate, double rw_cov, Rng& rng) {
  const double sd = std::sqrt(rw_cov);
  const double g = logit(cal.mu);
  const double l = std::log(cal.nu);
  const double g_new = g + sd * rng.normal();
  const double l_new = l + sd * rng.normal();
  const double u = rng.uniform();

  const double mu_new = logistic(g_new);
  const double nu_new = std::exp(l_new);
  if (!(mu_new > 0.0 && mu_new < 1.0) || !(nu_new > 0.0) ||
      !std::isfinite(nu_new))
    return false;

  const BetaMeanPrecision prop(mu_new, nu_new);
  double delta = atom_log_lik(prop, cache, members) -
                 atom_log_lik(cal, cache, members);
  delta += (xi_mu - 1.0) * (std::log(mu_new) + std::log1p(-mu_new) -
                            std::log(cal.mu) - std::log1p(-cal.mu));
  delta += (nu_shape - 1.0) * (l_new - l) - nu_rate * (nu_new - cal.nu);
  // Jacobian of (logit, log): mu(1-mu)nu.
  delta += std::log(mu_new) + std::log1p(-mu_new) + l_new -
           (std::log(cal.mu) + std::log1p(-cal.mu) + l);

  if (std::log(u) < delta) {
    cal = prop;
    return true;
  }
  return false;
}

bool mh_omega(CalibrationAtom& atom, ClusterCache& cache, const SeriesEval& se,
              std::span<const int> members, double xi_omega, Rng& rng) {
  const std::vector<double> conc(se.M, xi_omega);
  const PoolWeights prop(rng.dirichlet(conc));
  const double u = rng.uniform();

  const double a = atom.cal.alpha();
  const double b = atom.cal.beta();
  double delta = 0.0;
  for (int ti : members) {
    const std::size_t t = static_cast<std::size_t>(ti);
    const double h = se.h(t, prop);
    const double lk_new = (a - 1.0) * log_floor(se.H(t, prop)) +
                          (b - 1.0) * log_floor(se.S(t, prop)) +
                          (h > 0.0 ? std::log(h) : kNegInf);
    const double lk_old = (a - 1.0) * cache.logH[t] + (b - 1.0) * cache.log1mH[t] +
                          cache.logh[t];
    delta += lk_new - lk_old;
  }
  if (std::log(u) < delta) {
    atom.omega = prop;
    refresh_cluster_cache(cache, se, atom.omega);
    return true;
  }
  return false;
}

}  // namespace detail

std::vector<double> allocation_log_probs(const FiniteParams& params,
                                         const SeriesEval& se, std::size_t t) {
  std::vector<double> logp(params.K());
  for (std::size_t k = 0; k < params.K(); ++k) {
    const CalibrationAtom& atom = params.atoms[k];
    const double h = se.h(t, atom.omega);
    const double lw = params.w[k] > 0.0 ? std::log(params.w[k]) : kNegInf;
    logp[k] = lw + (atom.cal.alpha() - 1.0) * log_floor(se.H(t, atom.omega)) +
              (atom.cal.beta() - 1.0) * log_floor(se.S(t, atom.omega)) -
              log_beta_fn(atom.cal.alpha(), atom.cal.beta()) +
              (h > 0.0 ? std::log(h) : kNegInf);
  }
  return logp;
}

Allocation step_allocations(const FiniteParams& params, const SeriesEval& se,
                            Rng& rng, long* warnings) {
  Allocation alloc;
  alloc.d.resize(se.T);
  for (std::size_t t = 0; t < se.T; ++t) {
    const std::vector<double> logp = allocation_log_probs(params, se, t);
    int d = sample_categorical_log(logp, rng);
    if (d < 0) {
      // zero posterior mass everywhere: fall back to a uniform draw
      d = static_cast<int>(rng.uniform() * static_cast<double>(params.K()));
      d = std::min<int>(d, static_cast<int>(params.K()) - 1);
      if (warnings != nullptr) ++(*warnings);
    }
    alloc.d[t] = d;
  }
  return alloc;
}

int step_mu_nu(FiniteParams& params, const Allocation& alloc,
               const SeriesEval& se, const Hyperparams& hyper, double rw_cov,
               Rng& rng) {
  const auto members = member_lists(alloc.d, params.K());
  int accepted = 0;
  for (std::size_t k = 0; k < params.K(); ++k) {
    detail::ClusterCache cache;
    detail::refresh_cluster_cache(cache, se, params.atoms[k].omega);
    accepted += detail::mh_mu_nu(params.atoms[k].cal, cache, members[k],
                                 hyper.xi_mu, hyper.xi_nu, hyper.xi_nu, rw_cov,
                                 rng);
  }
  return accepted;
}

int step_omega(FiniteParams& params, const Allocation& alloc,
               const SeriesEval& se, const Hyperparams& hyper, Rng& rng) {
  const auto members = member_lists(alloc.d, params.K());
  int accepted = 0;
  for (std::size_t k = 0; k < params.K(); ++k) {
    detail::ClusterCache cache;
    detail::refresh_cluster_cache(cache, se, params.atoms[k].omega);
    accepted += detail::mh_omega(params.atoms[k], cache, se, members[k],
                                 hyper.xi_omega, rng);
  }
  return accepted;
}

std::vector<double> step_weights(const Allocation& alloc, std::size_t K,
                                 double xi_w, Rng& rng) {
  std::vector<double> conc(K, xi_w);
  for (int d : alloc.d) conc[static_cast<std::size_t>(d)] += 1.0;
  return rng.dirichlet(conc);
}

FiniteTrace run_finite_gibbs(const ForecastSeries& series, std::size_t K,
                             const Hyperparams& hyper, const McmcConfig& config) {
  config.validate();
  hyper.validate();
  if (K < 1) throw std::domain_error("run_finite_gibbs: K must be >= 1");
  const SeriesEval se = SeriesEval::from(series);
  Rng rng(config.seed);

  FiniteTrace trace;
  trace.K = K;
  trace.M = se.M;
  trace.hyper = hyper;
  trace.config = config;
  trace.draws.reserve(static_cast<std::size_t>(config.iterations / config.thin));

  FiniteParams params = prior_sample(hyper, K, se.M, rng);
  std::vector<detail::ClusterCache> caches(K);
  for (std::size_t k = 0; k < K; ++k)
    detail::refresh_cluster_cache(caches[k], se, params.atoms[k].omega);

  long prop_mu_nu = 0, acc_mu_nu = 0, prop_omega = 0, acc_omega = 0;
  const long total = config.burn_in + config.iterations;
  for (long it = 0; it < total; ++it) {
    const bool kept = it >= config.burn_in;

    Allocation alloc;
    alloc.d.resize(se.T);
    for (std::size_t t = 0; t < se.T; ++t) {
      std::vector<double> logp(K);
      for (std::size_t k = 0; k < K; ++k) {
        const CalibrationAtom& atom = params.atoms[k];
        const double lw = params.w[k] > 0.0 ? std::log(params.w[k]) : kNegInf;
        logp[k] = lw +
                  (atom.cal.alpha() - 1.0) * caches[k].logH[t] +
                  (atom.cal.beta() - 1.0) * caches[k].log1mH[t] -
                  log_beta_fn(atom.cal.alpha(), atom.cal.beta()) +
                  caches[k].logh[t];
      }
      int d = sample_categorical_log(logp, rng);
      if (d < 0) {
        d = std::min<int>(static_cast<int>(rng.uniform() * static_cast<double>(K)),
                          static_cast<int>(K) - 1);
        ++trace.numeric_warnings;
      }
      alloc.d[t] = d;
    }

    const auto members = member_lists(alloc.d, K);
    for (std::size_t k = 0; k < K; ++k) {
      const bool acc = detail::mh_mu_nu(params.atoms[k].cal, caches[k],
                                        members[k], hyper.xi_mu, hyper.xi_nu,
                                        hyper.xi_nu, config.rw_scale_mu_nu, rng);
      if (kept) {
        ++prop_mu_nu;
        acc_mu_nu += acc;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      const bool acc = detail::mh_omega(params.atoms[k], caches[k], se,
                                        members[k], hyper.xi_omega, rng);
      if (kept) {
        ++prop_omega;
        acc_omega += acc;
      }
    }
    params.w = step_weights(alloc, K, hyper.xi_w, rng);

    if (kept && (it - config.burn_in) % config.thin == 0) {
      trace.draws.push_back(params);
      std::vector<int> occ(K, 0);
      for (int d : alloc.d) ++occ[static_cast<std::size_t>(d)];
      trace.occupancy.push_back(std::move(occ));
    }
  }
  trace.acc_mu_nu = prop_mu_nu > 0 ? static_cast<double>(acc_mu_nu) / prop_mu_nu : 0.0;
  trace.acc_omega = prop_omega > 0 ? static_cast<double>(acc_omega) / prop_omega : 0.0;
  return trace;
}

namespace {

// Log posterior of the K=1 model on the unconstrained scale
// (logit mu, log nu, alr omega), transform Jacobians included.
double k1_log_target(const std::vector<double>& theta, const SeriesEval& se,
                     const Hyperparams& hyper) {
  const double mu = logistic(theta[0]);
  const double nu = std::exp(theta[1]);
  if (!(mu > 0.0 && mu < 1.0) || !(nu > 0.0) || !std::isfinite(nu))
    return kNegInf;
  const std::size_t M = se.M;
  std::vector<double> om(M);
  double denom = 1.0;
  for (std::size_t m = 0; m + 1 < M; ++m) {
    om[m] = std::exp(theta[2 + m]);
    denom += om[m];
  }
  if (!std::isfinite(denom)) return kNegInf;
  for (std::size_t m = 0; m + 1 < M; ++m) om[m] /= denom;
  om[M - 1] = 1.0 / denom;
  for (double v : om)
    if (!(v > 0.0 && v < 1.0)) return kNegInf;

  const double a = mu * nu;
  const double b = (1.0 - mu) * nu;
  const double lB = log_beta_fn(a, b);
  PoolWeights omega;
  omega.omega = om;
  double lik = 0.0;
  for (std::size_t t = 0; t < se.T; ++t) {
    const double h = se.h(t, omega);
    lik += (a - 1.0) * log_floor(se.H(t, omega)) +
           (b - 1.0) * log_floor(se.S(t, omega)) - lB +
           (h > 0.0 ? std::log(h) : kNegInf);
  }

  double prior = (hyper.xi_mu - 1.0) * (std::log(mu) + std::log1p(-mu));
  prior += (hyper.xi_nu - 1.0) * theta[1] - hyper.xi_nu * nu;
  for (double v : om) prior += (hyper.xi_omega - 1.0) * std::log(v);
  // Jacobians: mu(1-mu)nu for the first two coordinates, prod_m omega_m for alr.
  double jac = std::log(mu) + std::log1p(-mu) + theta[1];
  for (double v : om) jac += std::log(v);
  return lik + prior + jac;
}

}  // namespace

FiniteTrace run_global_mh_k1(const ForecastSeries& series,
                             const Hyperparams& hyper, const McmcConfig& config) {
  config.validate();
  hyper.validate();
  const SeriesEval se = SeriesEval::from(series);
  const std::size_t M = se.M;
  Rng rng(config.seed);

  FiniteTrace trace;
  trace.K = 1;
  trace.M = M;
  trace.hyper = hyper;
  trace.config = config;

  // Initialize from the prior on the unconstrained scale.
  FiniteParams init = prior_sample(hyper, 1, M, rng);
  std::vector<double> theta(2 + M - 1);
  theta[0] = logit(init.atoms[0].cal.mu);
  theta[1] = std::log(init.atoms[0].cal.nu);
  for (std::size_t m = 0; m + 1 < M; ++m)
    theta[2 + m] = std::log(init.atoms[0].omega[m] / init.atoms[0].omega[M - 1]);

  std::vector<double> sd(theta.size());
  for (std::size_t i = 0; i < sd.size(); ++i)
    sd[i] = std::sqrt(config.rw_scales_k1[std::min<std::size_t>(i, 2)]);

  double lp = k1_log_target(theta, se, hyper);
  long accepted = 0, proposals = 0;
  std::vector<double> prop(theta.size());
  const long total = config.burn_in + config.iterations;
  for (long it = 0; it < total; ++it) {
    for (std::size_t i = 0; i < theta.size(); ++i)
      prop[i] = theta[i] + sd[i] * rng.normal();
    const double u = rng.uniform();
    const double lp_new = k1_log_target(prop, se, hyper);
    const bool acc = std::log(u) < lp_new - lp;
    if (acc) {
      theta = prop;
      lp = lp_new;
    }
    const bool kept = it >= config.burn_in;
    if (kept) {
      ++proposals;
      accepted += acc;
      if ((it - config.burn_in) % config.thin == 0) {
        const double mu = logistic(theta[0]);
        const double nu = std::exp(theta[1]);
        std::vector<double> om(M);
        double denom = 1.0;
        for (std::size_t m = 0; m + 1 < M; ++m) {
          om[m] = std::exp(theta[2 + m]);
          denom += om[m];
        }
        for (std::size_t m = 0; m + 1 < M; ++m) om[m] /= denom;
        om[M - 1] = 1.0 / denom;
        FiniteParams p;
        p.w = {1.0};
        p.atoms.emplace_back(BetaMeanPrecision(mu, nu), PoolWeights(om));
        trace.draws.push_back(std::move(p));
        trace.occupancy.push_back({static_cast<int>(se.T)});
      }
    }
  }
  trace.acc_global = proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
  return trace;
}

double sample_bmk(const FiniteParams& params,
                  std::span<const ComponentForecast> components, Rng& rng) {
  const double u = rng.uniform();
  std::size_t k = 0;
  double cum = 0.0;
  for (; k < params.K(); ++k) {
    cum += params.w[k];
    if (u <= cum) break;
  }
  if (k == params.K()) k = params.K() - 1;
  const CalibrationAtom& atom = params.atoms[k];
  const double z = clamp_to_unit_interior(rng.beta(atom.cal.alpha(), atom.cal.beta()));
  return pool_inv_cdf(z, atom.omega, components);
}

}  // namespace bmcal
