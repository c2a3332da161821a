#include "bmcal/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bmcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Symmetric-Dirichlet log density on the open simplex; -inf on the boundary.
double dirichlet_log_pdf(std::span<const double> w, double xi) {
  const double n = static_cast<double>(w.size());
  double acc = log_gamma(xi * n) - n * log_gamma(xi);
  for (double v : w) {
    if (!(v > 0.0 && v < 1.0)) return kNegInf;
    acc += (xi - 1.0) * std::log(v);
  }
  return acc;
}

}  // namespace

PsiPrior PsiPrior::fixed_at(double v) {
  PsiPrior p;
  p.fixed = true;
  p.value = v;
  p.validate();
  return p;
}

PsiPrior PsiPrior::gamma(double c, double d) {
  PsiPrior p;
  p.fixed = false;
  p.c = c;
  p.d = d;
  p.validate();
  return p;
}

void PsiPrior::validate() const {
  if (fixed) {
    if (!(value > 0.0) || !std::isfinite(value))
      throw std::domain_error("PsiPrior: fixed psi must be positive");
  } else if (!(c > 0.0) || !(d > 0.0)) {
    throw std::domain_error("PsiPrior: gamma hyperparameters must be positive");
  }
}

void Hyperparams::validate() const {
  if (!(xi_w > 0.0) || !(xi_mu > 0.0) || !(xi_nu > 0.0) || !(xi_omega > 0.0))
    throw std::domain_error("Hyperparams: xi_* must all be positive");
  psi.validate();
}

void FiniteParams::validate() const {
  if (atoms.empty()) throw std::domain_error("FiniteParams: K must be >= 1");
  if (w.size() != atoms.size())
    throw std::domain_error("FiniteParams: w length must equal K");
  double total = 0.0;
  for (double v : w) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("FiniteParams: w entries must lie in [0,1]");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::domain_error("FiniteParams: w must sum to 1");
  const std::size_t m = atoms.front().omega.size();
  for (const CalibrationAtom& a : atoms)
    if (a.omega.size() != m)
      throw std::domain_error("FiniteParams: atoms disagree on component count");
}

double kernel_log_pdf_hsh(double H, double S, double h,
                          const BetaMeanPrecision& cal) {
  if (h <= 0.0 || H <= 0.0 || S <= 0.0) return kNegInf;
  const double a = cal.alpha();
  const double b = cal.beta();
  return (a - 1.0) * std::log(H) + (b - 1.0) * std::log(S) -
         (log_gamma(a) + log_gamma(b) - log_gamma(a + b)) + std::log(h);
}

double kernel_pdf(double y, const CalibrationAtom& atom,
                  std::span<const ComponentForecast> components) {
  const double H = pool_cdf(y, atom.omega, components);
  const double S = pool_survival(y, atom.omega, components);
  const double h = pool_pdf(y, atom.omega, components);
  return std::exp(kernel_log_pdf_hsh(H, S, h, atom.cal));
}

double bmk_cdf(double y, const FiniteParams& params,
               std::span<const ComponentForecast> components) {
  params.validate();
  double acc = 0.0;
  for (std::size_t k = 0; k < params.K(); ++k) {
    const double H = pool_cdf(y, params.atoms[k].omega, components);
    const double S = pool_survival(y, params.atoms[k].omega, components);
    acc += params.w[k] * reg_inc_beta_pair(H, S, params.atoms[k].cal.alpha(),
                                           params.atoms[k].cal.beta());
  }
  return acc;
}

double bmk_pdf(double y, const FiniteParams& params,
               std::span<const ComponentForecast> components) {
  params.validate();
  double acc = 0.0;
  for (std::size_t k = 0; k < params.K(); ++k)
    acc += params.w[k] * kernel_pdf(y, params.atoms[k], components);
  return acc;
}

std::vector<double> generalized_weights(double y, const FiniteParams& params,
                                        std::span<const ComponentForecast> components) {
  params.validate();
  if (params.M() != components.size())
    throw std::invalid_argument("generalized_weights: component count mismatch");
  std::vector<double> out(components.size(), 0.0);
  for (std::size_t k = 0; k < params.K(); ++k) {
    const CalibrationAtom& atom = params.atoms[k];
    const double H = pool_cdf(y, atom.omega, components);
    const double S = pool_survival(y, atom.omega, components);
    const double lb = kernel_log_pdf_hsh(H, S, 1.0, atom.cal);
    const double bstar = lb > kNegInf ? std::exp(lb) : 0.0;
    for (std::size_t m = 0; m < out.size(); ++m)
      out[m] += atom.omega[m] * params.w[k] * bstar;
  }
  return out;
}

double prior_log_density(const FiniteParams& params, const Hyperparams& hyper) {
  params.validate();
  hyper.validate();
  double acc = dirichlet_log_pdf(params.w, hyper.xi_w);
  for (const CalibrationAtom& atom : params.atoms) {
    const double mu = atom.cal.mu;
    const double nu = atom.cal.nu;
    if (!(mu > 0.0 && mu < 1.0) || !(nu > 0.0)) return kNegInf;
    acc += (hyper.xi_mu - 1.0) * (std::log(mu) + std::log1p(-mu)) +
           log_gamma(2.0 * hyper.xi_mu) - 2.0 * log_gamma(hyper.xi_mu);
    acc += hyper.xi_nu * std::log(hyper.xi_nu) - log_gamma(hyper.xi_nu) +
           (hyper.xi_nu - 1.0) * std::log(nu) - hyper.xi_nu * nu;
    acc += dirichlet_log_pdf(atom.omega.omega, hyper.xi_omega);
  }
  return acc;
}

FiniteParams prior_sample(const Hyperparams& hyper, std::size_t K, std::size_t M,
                          Rng& rng) {
  hyper.validate();
  if (K < 1 || M < 1)
    throw std::domain_error("prior_sample: K and M must be >= 1");
  FiniteParams params;
  const std::vector<double> conc_w(K, hyper.xi_w);
  params.w = rng.dirichlet(conc_w);
  const std::vector<double> conc_omega(M, hyper.xi_omega);
  params.atoms.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double mu = rng.beta(hyper.xi_mu, hyper.xi_mu);
    const double nu = rng.gamma(hyper.xi_nu, hyper.xi_nu);
    params.atoms.emplace_back(BetaMeanPrecision(mu, nu),
                              PoolWeights(rng.dirichlet(conc_omega)));
  }
  return params;
}

CalibrationAtom base_measure_sample(const Hyperparams& hyper, std::size_t M,
                                    Rng& rng) {
  const double mu = rng.beta(hyper.xi_mu, hyper.xi_mu);
  const double nu = rng.gamma(0.5 * hyper.xi_nu, 0.5 * hyper.xi_nu);
  const std::vector<double> conc(M, hyper.xi_omega);
  return CalibrationAtom(BetaMeanPrecision(mu, nu),
                         PoolWeights(rng.dirichlet(conc)));
}

}  // namespace bmcal
