#include "bmcal/sampler_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bmcal/errors.hpp"

namespace bmcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta_fn(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace

DPSampler::DPSampler(const ForecastSeries& series, const Hyperparams& hyper,
                     const McmcConfig& config)
    : se_(SeriesEval::from(series)), hyper_(hyper), config_(config) {
  hyper_.validate();
  config_.validate();
}

void DPSampler::seed_state(Rng& rng) {
  psi_ = hyper_.psi.fixed ? hyper_.psi.value
                          : rng.gamma(hyper_.psi.c, hyper_.psi.d);
  alloc_.assign(se_.T, 0);
  sticks_.clear();
  weights_.clear();
  atoms_.clear();
  caches_.clear();
  stick_remainder_ = 1.0;
  append_component(rng);
  slices_.resize(se_.T);
  double u_min = 1.0;
  for (std::size_t t = 0; t < se_.T; ++t) {
    slices_[t] = rng.uniform() * weights_[0];
    u_min = std::min(u_min, slices_[t]);
  }
  // Extend until the sticks cover the slice levels, as every sweep maintains.
  double covered = weights_[0];
  while (covered <= 1.0 - u_min) {
    append_component(rng);
    covered += weights_.back();
  }
}

void DPSampler::append_component(Rng& rng) {
  if (sticks_.size() >= static_cast<std::size_t>(config_.max_sticks))
    throw NumericalError(
        "slice sampler: stick count exceeded " +
        std::to_string(config_.max_sticks) + " (psi = " + std::to_string(psi_) +
        "); the representation failed to cover the slice levels");
  const double v = rng.beta(1.0, psi_);
  atoms_.push_back(base_measure_sample(hyper_, se_.M, rng));
  caches_.emplace_back();
  detail::refresh_cluster_cache(caches_.back(), se_, atoms_.back().omega);
  sticks_.push_back(v);
  weights_.push_back(v * stick_remainder_);
  stick_remainder_ *= (1.0 - v);
}

void DPSampler::recompute_weights() {
  weights_.resize(sticks_.size());
  double rem = 1.0;
  for (std::size_t k = 0; k < sticks_.size(); ++k) {
    weights_[k] = sticks_[k] * rem;
    rem *= (1.0 - sticks_[k]);
  }
  stick_remainder_ = rem;
}

void DPSampler::update_atoms(Rng& rng) {
  std::vector<std::vector<int>> members(atoms_.size());
  for (std::size_t t = 0; t < se_.T; ++t)
    members[static_cast<std::size_t>(alloc_[t])].push_back(static_cast<int>(t));
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (!members[k].empty()) {
      // Occupied atoms move by the finite-sampler MH kernels against the
      // base measure Be(xi_mu, xi_mu) x Ga(xi_nu/2, xi_nu/2).
      ++propose_mu_nu;
      accept_mu_nu += detail::mh_mu_nu(atoms_[k].cal, caches_[k], members[k],
                                       hyper_.xi_mu, 0.5 * hyper_.xi_nu,
                                       0.5 * hyper_.xi_nu,
                                       config_.rw_scale_mu_nu, rng);
      ++propose_omega;
      accept_omega += detail::mh_omega(atoms_[k], caches_[k], se_, members[k],
                                       hyper_.xi_omega, rng);
    } else {
      atoms_[k] = base_measure_sample(hyper_, se_.M, rng);
      detail::refresh_cluster_cache(caches_[k], se_, atoms_[k].omega);
    }
  }
}

void DPSampler::update_sticks_slices(Rng& rng) {
  const std::size_t T = se_.T;
  const int d_star = *std::max_element(alloc_.begin(), alloc_.end()) + 1;

  // Occupancy a_k and beyond-counts b_k for the occupied prefix.
  std::vector<double> a(static_cast<std::size_t>(d_star), 0.0);
  for (int d : alloc_) a[static_cast<std::size_t>(d)] += 1.0;
  double beyond = 0.0;
  for (int k = d_star - 1; k >= 0; --k) {
    sticks_[static_cast<std::size_t>(k)] =
        rng.beta(a[static_cast<std::size_t>(k)] + 1.0, beyond + psi_);
    beyond += a[static_cast<std::size_t>(k)];
  }

  // Unoccupied tail sticks are prior draws; drop them and regrow on demand.
  sticks_.resize(static_cast<std::size_t>(d_star));
  atoms_.erase(atoms_.begin() + d_star, atoms_.end());
  caches_.erase(caches_.begin() + d_star, caches_.end());
  recompute_weights();

  slices_.resize(T);
  double u_min = 1.0;
  for (std::size_t t = 0; t < T; ++t) {
    slices_[t] = rng.uniform() * weights_[static_cast<std::size_t>(alloc_[t])];
    u_min = std::min(u_min, slices_[t]);
  }

  double covered = 0.0;
  for (double w : weights_) covered += w;
  while (covered <= 1.0 - u_min) {
    append_component(rng);
    covered += weights_.back();
  }
}

void DPSampler::update_allocations(Rng& rng) {
  const std::size_t L = weights_.size();
  std::vector<double> lB(L), am1(L), bm1(L);
  for (std::size_t k = 0; k < L; ++k) {
    am1[k] = atoms_[k].cal.alpha() - 1.0;
    bm1[k] = atoms_[k].cal.beta() - 1.0;
    lB[k] = log_beta_fn(atoms_[k].cal.alpha(), atoms_[k].cal.beta());
  }
  std::vector<int> admissible;
  std::vector<double> logp;
  for (std::size_t t = 0; t < se_.T; ++t) {
    const double u = slices_[t];
    admissible.clear();
    for (std::size_t k = 0; k < L; ++k)
      if (weights_[k] > u) admissible.push_back(static_cast<int>(k));
    if (admissible.size() == 1) {
      alloc_[t] = admissible[0];
      continue;
    }
    logp.resize(admissible.size());
    for (std::size_t j = 0; j < admissible.size(); ++j) {
      const std::size_t k = static_cast<std::size_t>(admissible[j]);
      logp[j] = am1[k] * caches_[k].logH[t] + bm1[k] * caches_[k].log1mH[t] -
                lB[k] + caches_[k].logh[t];
    }
    const int j = sample_categorical_log(logp, rng);
    if (j < 0) {
      alloc_[t] = admissible[std::min<std::size_t>(
          static_cast<std::size_t>(rng.uniform() * admissible.size()),
          admissible.size() - 1)];
      ++numeric_warnings;
    } else {
      alloc_[t] = admissible[static_cast<std::size_t>(j)];
    }
  }
}

double psi_gibbs_update(double psi, int occupied, std::size_t T, double c,
                        double d, Rng& rng) {
  const double eta = rng.beta(psi + 1.0, static_cast<double>(T));
  const double rate = d - std::log(eta);
  const double w1 = c + occupied - 1.0;
  const double w2 = static_cast<double>(T) * rate;
  const double u = rng.uniform();
  const double shape = (u < w1 / (w1 + w2)) ? c + occupied : c + occupied - 1.0;
  return rng.gamma(shape, rate);
}

void DPSampler::update_psi(Rng& rng) {
  if (hyper_.psi.fixed) return;
  psi_ = psi_gibbs_update(psi_, occupied_count(), se_.T, hyper_.psi.c,
                          hyper_.psi.d, rng);
}

int DPSampler::occupied_count() const {
  std::vector<char> seen(atoms_.size(), 0);
  int n = 0;
  for (int d : alloc_) {
    if (!seen[static_cast<std::size_t>(d)]) {
      seen[static_cast<std::size_t>(d)] = 1;
      ++n;
    }
  }
  return n;
}

void DPSampler::sweep(Rng& rng) {
  update_atoms(rng);
  update_sticks_slices(rng);
  update_allocations(rng);
  update_psi(rng);
#ifndef NDEBUG
  check_state();
#endif
}

DPSnapshot DPSampler::snapshot() const {
  DPSnapshot snap;
  snap.weights = weights_;
  snap.atoms = atoms_;
  snap.alloc = alloc_;
  snap.psi = psi_;
  snap.n_occupied = occupied_count();
  return snap;
}

void DPSampler::check_state() const {
  const std::size_t L = sticks_.size();
  if (atoms_.size() != L || weights_.size() != L || caches_.size() != L)
    throw std::logic_error("DPSampler: ragged state arrays");
  double rem = 1.0, covered = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    if (!(sticks_[k] > 0.0 && sticks_[k] < 1.0))
      throw std::logic_error("DPSampler: stick outside (0,1)");
    const double w = sticks_[k] * rem;
    if (std::fabs(w - weights_[k]) > 1e-12)
      throw std::logic_error("DPSampler: weights drifted from sticks");
    rem *= (1.0 - sticks_[k]);
    covered += weights_[k];
  }
  double u_min = 1.0;
  for (std::size_t t = 0; t < se_.T; ++t) {
    const int d = alloc_[t];
    if (d < 0 || static_cast<std::size_t>(d) >= L)
      throw std::logic_error("DPSampler: allocation out of range");
    if (!(slices_[t] > 0.0 && slices_[t] < weights_[static_cast<std::size_t>(d)]))
      throw std::logic_error("DPSampler: slice level outside (0, w_d)");
    u_min = std::min(u_min, slices_[t]);
  }
  if (covered <= 1.0 - u_min)
    throw std::logic_error("DPSampler: sticks fail to cover the slice levels");
  if (!(psi_ > 0.0)) throw std::logic_error("DPSampler: psi must be positive");
}

DPTrace run_slice_sampler(const ForecastSeries& series, const Hyperparams& hyper,
                          const McmcConfig& config) {
  DPSampler sampler(series, hyper, config);
  Rng rng(config.seed);
  sampler.seed_state(rng);

  DPTrace trace;
  trace.M = sampler.series_eval().M;
  trace.hyper = hyper;
  trace.config = config;
  trace.cluster_counts.reserve(
      static_cast<std::size_t>(config.burn_in + config.iterations));
  trace.draws.reserve(static_cast<std::size_t>(config.iterations / config.thin));

  long base_prop_mu = 0, base_acc_mu = 0, base_prop_om = 0, base_acc_om = 0;
  const long total = config.burn_in + config.iterations;
  for (long it = 0; it < total; ++it) {
    sampler.sweep(rng);
    trace.cluster_counts.push_back(sampler.occupied_count());
    if (it == config.burn_in - 1) {
      base_prop_mu = sampler.propose_mu_nu;
      base_acc_mu = sampler.accept_mu_nu;
      base_prop_om = sampler.propose_omega;
      base_acc_om = sampler.accept_omega;
    }
    if (it >= config.burn_in && (it - config.burn_in) % config.thin == 0)
      trace.draws.push_back(sampler.snapshot());
  }
  // Acceptance rates over the kept sweeps only.
  const long prop_mu = sampler.propose_mu_nu - base_prop_mu;
  const long prop_om = sampler.propose_omega - base_prop_om;
  trace.acc_mu_nu =
      prop_mu > 0 ? static_cast<double>(sampler.accept_mu_nu - base_acc_mu) /
                        static_cast<double>(prop_mu)
                  : 0.0;
  trace.acc_omega =
      prop_om > 0 ? static_cast<double>(sampler.accept_omega - base_acc_om) /
                        static_cast<double>(prop_om)
                  : 0.0;
  trace.numeric_warnings = sampler.numeric_warnings;
  return trace;
}

double sample_predictive_dp(const DPSnapshot& snap, const Hyperparams& hyper,
                            std::span<const ComponentForecast> components,
                            Rng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t j = 0;
  bool found = false;
  for (; j < snap.weights.size(); ++j) {
    cum += snap.weights[j];
    if (u <= cum) {
      found = true;
      break;
    }
  }
  CalibrationAtom atom = found ? snap.atoms[j]
                               : base_measure_sample(hyper, components.size(), rng);
  if (!found) {
    // Continue the stick-breaking construction past the stored mass.
    double rem = 1.0 - cum;
    for (int guard = 0; guard < 10000; ++guard) {
      const double v = rng.beta(1.0, snap.psi);
      cum += v * rem;
      rem *= (1.0 - v);
      if (u <= cum || rem <= 0.0) break;
      atom = base_measure_sample(hyper, components.size(), rng);
    }
  }
  const double z = clamp_to_unit_interior(rng.beta(atom.cal.alpha(), atom.cal.beta()));
  return pool_inv_cdf(z, atom.omega, components);
}

}  // namespace bmcal
