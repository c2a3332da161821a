#pragma once

#include <functional>
#include <string>
#include <vector>

namespace bmcal {

double norm_cdf(double z);
double norm_pdf(double z);
double norm_quantile(double p);

enum class Family {
  normal,
  student_t,
  skew_normal,
  truncated_normal_at_zero,
  gev,
  grid,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// One external predictive distribution.  Parametric families use
// location/scale plus shape or dof; the grid family carries a piecewise-linear
// cdf over strictly increasing support points.
struct ComponentForecast {
  Family family = Family::normal;
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;  // skew_normal slant, gev tail index
  double dof = 0.0;
  std::vector<double> grid_x;
  std::vector<double> grid_cdf;

  static ComponentForecast make_normal(double location, double scale);
  static ComponentForecast make_student_t(double location, double scale, double dof);
  static ComponentForecast make_skew_normal(double location, double scale, double shape);
  static ComponentForecast make_truncated_normal(double location, double scale);
  static ComponentForecast make_gev(double location, double scale, double shape);
  static ComponentForecast make_grid(std::vector<double> x, std::vector<double> cdf);

  // Throws std::domain_error naming the offending parameter.
  void validate() const;

  double cdf(double y) const;
  // Upper-tail probability, accurate where 1 - cdf(y) would cancel.
  double survival(double y) const;
  double pdf(double y) const;
  double quantile(double q) const;
};

// Density of the skew normal with slant rho: (2/scale) phi(z) Phi(rho z).
double skew_normal_pdf(double y, double location, double scale, double rho);
double skew_normal_cdf(double y, double location, double scale, double rho);

// Adaptive Simpson integration, shared by the skew-normal cdf and the test
// oracles.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

}  // namespace bmcal
