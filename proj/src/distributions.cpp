#include "bmcal/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmcal/errors.hpp"
#include "bmcal/special_fns.hpp"

namespace bmcal {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kSqrt1_2 = 0.7071067811865475244;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower integration cut for the skew-normal cdf on the standardized scale;
// the density is bounded by 2 phi, so mass below -14 is < 1e-43.
constexpr double kSkewLowerCut = -14.0;

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol,
                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double generic_quantile(const ComponentForecast& c, double q) {
  // Bracket by geometric expansion around location, then bisect.
  double step = std::max(c.scale, 1.0);
  double lo = c.location - step;
  double hi = c.location + step;
  for (int i = 0; i < 200 && c.cdf(lo) > q; ++i) {
    step *= 2.0;
    lo -= step;
  }
  for (int i = 0; i < 200 && c.cdf(hi) < q; ++i) {
    step *= 2.0;
    hi += step;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = c.cdf(mid);
    if (std::fabs(fm - q) <= 1e-12 || hi - lo <= 1e-14 * (1.0 + std::fabs(mid)))
      return mid;
    (fm < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kSqrt1_2); }

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  // Acklam's rational approximation, then two Newton corrections.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    const double e = norm_cdf(x) - p;
    const double u = e / norm_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);  // Halley step
  }
  return x;
}

std::string family_name(Family f) {
  switch (f) {
    case Family::normal: return "normal";
    case Family::student_t: return "student_t";
    case Family::skew_normal: return "skew_normal";
    case Family::truncated_normal_at_zero: return "truncated_normal_at_zero";
    case Family::gev: return "gev";
    case Family::grid: return "grid";
  }
  throw std::logic_error("family_name: bad enum value");
}

Family family_from_name(const std::string& name) {
  if (name == "normal") return Family::normal;
  if (name == "student_t") return Family::student_t;
  if (name == "skew_normal") return Family::skew_normal;
  if (name == "truncated_normal_at_zero") return Family::truncated_normal_at_zero;
  if (name == "gev") return Family::gev;
  if (name == "grid") return Family::grid;
  throw ParseError("unknown forecast family '" + name + "'");
}

ComponentForecast ComponentForecast::make_normal(double location, double scale) {
  ComponentForecast c;
  c.family = Family::normal;
  c.location = location;
  c.scale = scale;
  c.validate();
  return c;
}

ComponentForecast ComponentForecast::make_student_t(double location, double scale,
                                                    double dof) {
  ComponentForecast c;
  c.family = Family::student_t;
  c.location = location;
  c.scale = scale;
  c.dof = dof;
  c.validate();
  return c;
}

ComponentForecast ComponentForecast::make_skew_normal(double location,
                                                      double scale,
                                                      double shape) {
  ComponentForecast c;
  c.family = Family::skew_normal;
  c.location = location;
  c.scale = scale;
  c.shape = shape;
  c.validate();
  return c;
}

ComponentForecast ComponentForecast::make_truncated_normal(double location,
                                                           double scale) {
  ComponentForecast c;
  c.family = Family::truncated_normal_at_zero;
  c.location = location;
  c.scale = scale;
  c.validate();
  return c;
}

ComponentForecast ComponentForecast::make_gev(double location, double scale,
                                              double shape) {
  ComponentForecast c;
  c.family = Family::gev;
  c.location = location;
  c.scale = scale;
  c.shape = shape;
  c.validate();
  return c;
}

ComponentForecast ComponentForecast::make_grid(std::vector<double> x,
                                               std::vector<double> cdf) {
  ComponentForecast c;
  c.family = Family::grid;
  c.grid_x = std::move(x);
  c.grid_cdf = std::move(cdf);
  c.validate();
  return c;
}

void ComponentForecast::validate() const {
  if (family == Family::grid) {
    if (grid_x.size() < 2 || grid_x.size() != grid_cdf.size())
      throw std::domain_error(
          "grid forecast: params.x and params.cdf need equal length >= 2");
    for (std::size_t i = 0; i + 1 < grid_x.size(); ++i)
      if (!(grid_x[i] < grid_x[i + 1]))
        throw std::domain_error("grid forecast: params.x must be strictly increasing");
    for (std::size_t i = 0; i < grid_cdf.size(); ++i) {
      if (!(grid_cdf[i] >= 0.0 && grid_cdf[i] <= 1.0))
        throw std::domain_error("grid forecast: params.cdf must lie in [0,1]");
      if (i > 0 && grid_cdf[i] < grid_cdf[i - 1])
        throw std::domain_error("grid forecast: params.cdf must be nondecreasing");
    }
    if (grid_cdf.front() > 1e-6 || grid_cdf.back() < 1.0 - 1e-6)
      throw std::domain_error(
          "grid forecast: params.cdf must start <= 1e-6 and end >= 1-1e-6");
    return;
  }
  if (!std::isfinite(location))
    throw std::domain_error(family_name(family) + " forecast: params.location must be finite");
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw std::domain_error(family_name(family) + " forecast: params.scale must be positive");
  if (family == Family::student_t && (!(dof > 0.0) || !std::isfinite(dof)))
    throw std::domain_error("student_t forecast: params.dof must be positive");
  if ((family == Family::skew_normal || family == Family::gev) &&
      !std::isfinite(shape))
    throw std::domain_error(family_name(family) + " forecast: params.shape must be finite");
}

double ComponentForecast::cdf(double y) const {
  const double z = (y - location) / scale;
  switch (family) {
    case Family::normal:
      return norm_cdf(z);
    case Family::student_t: {
      if (z == 0.0) return 0.5;
      const double x = dof / (dof + z * z);
      const double p = 0.5 * reg_inc_beta(x, 0.5 * dof, 0.5);
      return z > 0.0 ? 1.0 - p : p;
    }
    case Family::skew_normal:
      return skew_normal_cdf(y, location, scale, shape);
    case Family::truncated_normal_at_zero: {
      if (y < 0.0) return 0.0;
      const double lower = norm_cdf(-location / scale);
      return (norm_cdf(z) - lower) / (1.0 - lower);
    }
    case Family::gev: {
      if (shape == 0.0) return std::exp(-std::exp(-z));
      const double s = 1.0 + shape * z;
      if (s <= 0.0) return shape > 0.0 ? 0.0 : 1.0;
      return std::exp(-std::pow(s, -1.0 / shape));
    }
    case Family::grid: {
      if (y <= grid_x.front()) return y < grid_x.front() ? 0.0 : grid_cdf.front();
      if (y >= grid_x.back()) return y > grid_x.back() ? 1.0 : grid_cdf.back();
      const auto it = std::upper_bound(grid_x.begin(), grid_x.end(), y);
      const std::size_t i = static_cast<std::size_t>(it - grid_x.begin()) - 1;
      const double t = (y - grid_x[i]) / (grid_x[i + 1] - grid_x[i]);
      return grid_cdf[i] + t * (grid_cdf[i + 1] - grid_cdf[i]);
    }
  }
  throw std::logic_error("ComponentForecast::cdf: bad family");
}

double ComponentForecast::survival(double y) const {
  const double z = (y - location) / scale;
  switch (family) {
    case Family::normal:
      return norm_cdf(-z);
    case Family::student_t: {
      if (z == 0.0) return 0.5;
      const double x = dof / (dof + z * z);
      const double p = 0.5 * reg_inc_beta(x, 0.5 * dof, 0.5);
      return z > 0.0 ? p : 1.0 - p;
    }
    case Family::skew_normal: {
      if (z < 5.0) return 1.0 - skew_normal_cdf(y, location, scale, shape);
      // Deep right tail: integrate the density under a half-normal envelope;
      // the subtraction above has no precision left out here.
      const double envelope = 2.0 * norm_cdf(-z);
      if (envelope <= 0.0) return 0.0;
      const double hi = location + 40.0 * scale;
      if (y >= hi) return 0.0;
      return adaptive_simpson([this](double s) { return pdf(s); }, y, hi,
                              1e-5 * envelope * scale);
    }
    case Family::truncated_normal_at_zero: {
      if (y < 0.0) return 1.0;
      const double lower = norm_cdf(-location / scale);
      return norm_cdf(-z) / (1.0 - lower);
    }
    case Family::gev: {
      if (shape == 0.0) return -std::expm1(-std::exp(-z));
      const double s = 1.0 + shape * z;
      if (s <= 0.0) return shape > 0.0 ? 1.0 : 0.0;
      return -std::expm1(-std::pow(s, -1.0 / shape));
    }
    case Family::grid:
      if (y > grid_x.back()) return 0.0;
      return 1.0 - cdf(y);
  }
  throw std::logic_error("ComponentForecast::survival: bad family");
}

double ComponentForecast::pdf(double y) const {
  const double z = (y - location) / scale;
  switch (family) {
    case Family::normal:
      return norm_pdf(z) / scale;
    case Family::student_t: {
      const double lp = log_gamma(0.5 * (dof + 1.0)) - log_gamma(0.5 * dof) -
                        0.5 * std::log(dof * M_PI) -
                        0.5 * (dof + 1.0) * std::log1p(z * z / dof);
      return std::exp(lp) / scale;
    }
    case Family::skew_normal:
      return skew_normal_pdf(y, location, scale, shape);
    case Family::truncated_normal_at_zero: {
      if (y < 0.0) return 0.0;
      const double lower = norm_cdf(-location / scale);
      return norm_pdf(z) / scale / (1.0 - lower);
    }
    case Family::gev: {
      if (shape == 0.0) {
        const double e = std::exp(-z);
        return e * std::exp(-e) / scale;
      }
      const double s = 1.0 + shape * z;
      if (s <= 0.0) return 0.0;
      const double t = std::pow(s, -1.0 / shape);
      return t / s * std::exp(-t) / scale;
    }
    case Family::grid: {
      if (y < grid_x.front() || y >= grid_x.back()) return 0.0;
      const auto it = std::upper_bound(grid_x.begin(), grid_x.end(), y);
      const std::size_t i = static_cast<std::size_t>(it - grid_x.begin()) - 1;
      return (grid_cdf[i + 1] - grid_cdf[i]) / (grid_x[i + 1] - grid_x[i]);
    }
  }
  throw std::logic_error("ComponentForecast::pdf: bad family");
}

double ComponentForecast::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("ComponentForecast::quantile: q must lie in (0,1)");
  switch (family) {
    case Family::normal:
      return location + scale * norm_quantile(q);
    case Family::truncated_normal_at_zero: {
      const double lower = norm_cdf(-location / scale);
      return location + scale * norm_quantile(lower + q * (1.0 - lower));
    }
    case Family::gev: {
      if (shape == 0.0) return location - scale * std::log(-std::log(q));
      return location + scale * (std::pow(-std::log(q), -shape) - 1.0) / shape;
    }
    case Family::grid: {
      if (q <= grid_cdf.front()) return grid_x.front();
      if (q >= grid_cdf.back()) return grid_x.back();
      const auto it = std::lower_bound(grid_cdf.begin(), grid_cdf.end(), q);
      const std::size_t i = static_cast<std::size_t>(it - grid_cdf.begin());
      if (grid_cdf[i] == q) return grid_x[i];
      const double span = grid_cdf[i] - grid_cdf[i - 1];
      const double t = (q - grid_cdf[i - 1]) / span;
      return grid_x[i - 1] + t * (grid_x[i] - grid_x[i - 1]);
    }
    case Family::student_t:
    case Family::skew_normal:
      return generic_quantile(*this, q);
  }
  throw std::logic_error("ComponentForecast::quantile: bad family");
}

double skew_normal_pdf(double y, double location, double scale, double rho) {
  const double z = (y - location) / scale;
  return 2.0 / scale * norm_pdf(z) * norm_cdf(rho * z);
}

double skew_normal_cdf(double y, double location, double scale, double rho) {
  const double z = (y - location) / scale;
  if (z <= kSkewLowerCut) return 0.0;
  const double zc = std::min(z, -kSkewLowerCut);
  const auto f = [rho](double s) { return 2.0 * norm_pdf(s) * norm_cdf(rho * s); };
  const double fa = f(kSkewLowerCut);
  const double fb = f(zc);
  const double fm = f(0.5 * (kSkewLowerCut + zc));
  const double whole = (zc - kSkewLowerCut) / 6.0 * (fa + 4.0 * fm + fb);
  double p = simpson_rec(f, kSkewLowerCut, zc, fa, fm, fb, whole, 1e-10, 48);
  if (z > -kSkewLowerCut) p = 1.0;  // upper tail beyond the cut
  return std::clamp(p, 0.0, 1.0);
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace bmcal
