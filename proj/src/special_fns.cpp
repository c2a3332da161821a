#include "bmcal/special_fns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "bmcal/errors.hpp"

namespace bmcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

// Continued fraction for the incomplete beta, modified Lentz recurrence.
double beta_cont_frac(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

// Unnormalized beta log density with raw shape parameters.
double raw_beta_log_pdf(double x, double a, double b) {
  const double xc = std::clamp(x, kUnitClamp, 1.0 - kUnitClamp);
  return (a - 1.0) * std::log(xc) + (b - 1.0) * std::log1p(-xc) +
         log_gamma(a + b) - log_gamma(a) - log_gamma(b);
}

}  // namespace

BetaMeanPrecision::BetaMeanPrecision(double mu_, double nu_) : mu(mu_), nu(nu_) {
  if (!(mu > 0.0 && mu < 1.0))
    throw std::domain_error("BetaMeanPrecision: mu must lie in (0,1), got " +
                            std::to_string(mu));
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw std::domain_error("BetaMeanPrecision: nu must be positive, got " +
                            std::to_string(nu));
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::domain_error("log_gamma: x must be positive, got " +
                            std::to_string(x));
  return std::lgamma(x);
}

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta: shape parameters must be positive");
  if (std::isnan(x) || x < 0.0 || x > 1.0)
    throw std::domain_error("reg_inc_beta: x must lie in [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  if (a == 1.0 && b == 1.0) return x;
  if (a == 1.0) return -std::expm1(b * std::log1p(-x));
  if (b == 1.0) return std::exp(a * std::log(x));

  const double lfront = a * std::log(x) + b * std::log1p(-x) +
                        log_gamma(a + b) - log_gamma(a) - log_gamma(b);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(lfront) * beta_cont_frac(a, b, x) / a;
  return 1.0 - std::exp(lfront) * beta_cont_frac(b, a, 1.0 - x) / b;
}

double reg_inc_beta_pair(double x, double one_minus_x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  if (x <= 0.5) return reg_inc_beta(std::min(x, 1.0), a, b);
  return 1.0 - reg_inc_beta(std::min(one_minus_x, 1.0), b, a);
}

double reg_inc_beta_inv(double q, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("reg_inc_beta_inv: shape parameters must be positive");
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("reg_inc_beta_inv: q must lie in (0,1)");

  // Solve on the lower tail of whichever end is nearer; small-shape betas
  // have quantiles far below any linear-scale bracket, so the bisection runs
  // on log x.
  const double qm = reg_inc_beta(0.5, a, b);
  if (q > qm) return 1.0 - reg_inc_beta_inv(1.0 - q, b, a);
  double ulo = std::log(std::numeric_limits<double>::denorm_min());
  double uhi = std::log(0.5);
  if (reg_inc_beta(std::exp(ulo), a, b) >= q) return std::exp(ulo);
  while (uhi - ulo > 1e-14) {
    const double u = 0.5 * (ulo + uhi);
    if (u == ulo || u == uhi) break;  // ulp-wide bracket
    (reg_inc_beta(std::exp(u), a, b) < q ? ulo : uhi) = u;
  }
  return std::exp(0.5 * (ulo + uhi));
}

double beta_log_pdf(double x, const BetaMeanPrecision& p) {
  if (std::isnan(x) || x < 0.0 || x > 1.0)
    throw std::domain_error("beta_log_pdf: x must lie in [0,1]");
  return raw_beta_log_pdf(x, p.alpha(), p.beta());
}

double beta_pdf(double x, const BetaMeanPrecision& p) {
  if (std::isnan(x) || x < 0.0 || x > 1.0)
    throw std::domain_error("beta_pdf: x must lie in [0,1]");
  const double a = p.alpha();
  const double b = p.beta();
  if (x == 0.0 || x == 1.0) {
    const double expo = (x == 0.0) ? a - 1.0 : b - 1.0;
    if (expo > 0.0) return 0.0;
    if (expo == 0.0)
      return std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b));
    return kInf;
  }
  return std::exp(raw_beta_log_pdf(x, a, b));
}

double beta_cdf(double x, const BetaMeanPrecision& p) {
  return reg_inc_beta(x, p.alpha(), p.beta());
}

double beta_inv_cdf(double q, const BetaMeanPrecision& p) {
  return reg_inc_beta_inv(q, p.alpha(), p.beta());
}

std::vector<double> log_stirling1_row(int t) {
  if (t < 1) throw std::domain_error("log_stirling1_row: t must be >= 1");
  // c(n+1, k) = n c(n, k) + c(n, k-1), run in log space.
  std::vector<double> row{0.0};  // t = 1: c(1,1) = 1
  std::vector<double> next;
  for (int n = 1; n < t; ++n) {
    next.assign(n + 1, -kInf);
    const double ln_n = std::log(static_cast<double>(n));
    for (int k = 1; k <= n + 1; ++k) {
      const double carry = (k <= n) ? ln_n + row[k - 1] : -kInf;
      const double shift = (k >= 2) ? row[k - 2] : -kInf;
      next[k - 1] = log_add_exp(carry, shift);
    }
    row.swap(next);
  }
  return row;
}

double log_unsigned_stirling1(int t, int k) {
  if (t < 1 || t > 500)
    throw std::domain_error("log_unsigned_stirling1: t must lie in [1,500]");
  if (k < 1 || k > t)
    throw std::domain_error("log_unsigned_stirling1: k must lie in [1,t]");
  return log_stirling1_row(t)[k - 1];
}

std::vector<double> antoniak_pmf(double psi, int t) {
  if (!(psi > 0.0) || !std::isfinite(psi))
    throw std::domain_error("antoniak_pmf: psi must be positive");
  if (t < 1) throw std::domain_error("antoniak_pmf: t must be >= 1");

  const std::vector<double> row = log_stirling1_row(t);
  const double lpsi = std::log(psi);
  const double lconst = log_gamma(psi) - log_gamma(psi + t);
  std::vector<double> logp(t);
  double lse = -kInf;
  for (int k = 1; k <= t; ++k) {
    logp[k - 1] = row[k - 1] + k * lpsi + lconst;
    lse = log_add_exp(lse, logp[k - 1]);
  }
  std::vector<double> pmf(t);
  double total = 0.0;
  for (int k = 0; k < t; ++k) {
    pmf[k] = std::exp(logp[k] - lse);
    total += pmf[k];
  }
  for (double& v : pmf) v /= total;
  return pmf;
}

}  // namespace bmcal
