#pragma once

#include <span>
#include <vector>

#include "bmcal/pool.hpp"
#include "bmcal/rng.hpp"
#include "bmcal/special_fns.hpp"

namespace bmcal {

// Concentration of the Dirichlet process: either held fixed or given a
// Gamma(c, d) hyperprior (shape/rate).
struct PsiPrior {
  bool fixed = false;
  double value = 1.0;  // used when fixed
  double c = 2.0;
  double d = 2.0;

  static PsiPrior fixed_at(double v);
  static PsiPrior gamma(double c, double d);
  void validate() const;
};

struct Hyperparams {
  double xi_w = 1.0;      // mixture weights, Dirichlet
  double xi_mu = 2.0;     // calibration means, symmetric beta
  double xi_nu = 0.1;     // calibration precisions, gamma with shape = rate
  double xi_omega = 1.0;  // pool weights, Dirichlet
  PsiPrior psi;

  void validate() const;
};

// One calibration component: beta parameters plus its pool weights.
struct CalibrationAtom {
  BetaMeanPrecision cal;
  PoolWeights omega;

  CalibrationAtom(BetaMeanPrecision c, PoolWeights o)
      : cal(c), omega(std::move(o)) {}
};

// Finite beta-mixture calibration parameters (w, {mu_k, nu_k, omega_k}).
struct FiniteParams {
  std::vector<double> w;
  std::vector<CalibrationAtom> atoms;

  std::size_t K() const { return atoms.size(); }
  std::size_t M() const { return atoms.empty() ? 0 : atoms.front().omega.size(); }
  void validate() const;
};

// Cluster assignment of each observation, entries in [0, K).
struct Allocation {
  std::vector<int> d;
};

// log of b*(H) h with H, S = 1 - H, h the pool cdf/survival/pdf already
// evaluated.  Passing the survival separately keeps the upper tail accurate
// where 1 - H would cancel; returns -inf off the kernel's support.
double kernel_log_pdf_hsh(double H, double S, double h,
                          const BetaMeanPrecision& cal);

// Density of a single calibrated component at y.
double kernel_pdf(double y, const CalibrationAtom& atom,
                  std::span<const ComponentForecast> components);

// Mixture predictive cdf/pdf at y for finite parameters.
double bmk_cdf(double y, const FiniteParams& params,
               std::span<const ComponentForecast> components);
double bmk_pdf(double y, const FiniteParams& params,
               std::span<const ComponentForecast> components);

// Pointwise generalized pool weights: omega~_m(y) =
// sum_k omega_{km} w_k b*(H(y|omega_k)).  They integrate the calibration into
// per-component weights and need not sum to one.
std::vector<double> generalized_weights(double y, const FiniteParams& params,
                                        std::span<const ComponentForecast> components);

// Joint log prior of the finite parameters; -inf on simplex or (0,1) boundaries.
double prior_log_density(const FiniteParams& params, const Hyperparams& hyper);

FiniteParams prior_sample(const Hyperparams& hyper, std::size_t K, std::size_t M,
                          Rng& rng);

// Draw one atom from the Dirichlet-process base measure
// Be(xi_mu, xi_mu) x Ga(xi_nu/2, xi_nu/2) x Dir(xi_omega, ..., xi_omega).
CalibrationAtom base_measure_sample(const Hyperparams& hyper, std::size_t M,
                                    Rng& rng);

}  // namespace bmcal
