#pragma once

#include <vector>

namespace bmcal {

// beta_log_pdf clamps its argument into [kUnitClamp, 1 - kUnitClamp] before
// logs are taken; callers that track the complement separately should use the
// *_pair / survival-form entry points instead.
inline constexpr double kUnitClamp = 1e-12;

// Beta distribution in mean/precision form: alpha = mu*nu, beta = (1-mu)*nu.
struct BetaMeanPrecision {
  double mu;
  double nu;

  BetaMeanPrecision(double mu_, double nu_);

  double alpha() const { return mu * nu; }
  double beta() const { return (1.0 - mu) * nu; }
};

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation with
// the symmetry switch at x = (a+1)/(a+b+2).
double reg_inc_beta(double x, double a, double b);

// reg_inc_beta from a separately computed (x, 1-x) pair, evaluating whichever
// tail is the accurate one.  Near x = 1 the complement carries the precision a
// small beta exponent amplifies, so the direct form must not be used there.
double reg_inc_beta_pair(double x, double one_minus_x, double a, double b);

// Inverse of reg_inc_beta in x for fixed (a, b); |I_x(a,b) - q| <= 1e-10
// wherever some double attains that.  Tail quantiles within one ulp of 0 or 1
// (possible for sub-unit shapes) round to the boundary.
double reg_inc_beta_inv(double q, double a, double b);

double beta_log_pdf(double x, const BetaMeanPrecision& p);
double beta_pdf(double x, const BetaMeanPrecision& p);
double beta_cdf(double x, const BetaMeanPrecision& p);
double beta_inv_cdf(double q, const BetaMeanPrecision& p);

// ln c(t, k) for unsigned Stirling numbers of the first kind, 1 <= k <= t <= 500.
double log_unsigned_stirling1(int t, int k);

// Row {ln c(t, k)}_{k=1..t} of the unsigned Stirling-number triangle.
std::vector<double> log_stirling1_row(int t);

// Prior pmf of the number of occupied Dirichlet-process clusters among t
// observations at concentration psi, over k = 1..t.  Computed in log space
// from |s(t,k)| psi^k Gamma(psi)/Gamma(psi+t) and renormalized.
std::vector<double> antoniak_pmf(double psi, int t);

}  // namespace bmcal
