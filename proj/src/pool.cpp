#include "bmcal/pool.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bmcal {

PoolWeights::PoolWeights(std::vector<double> w) : omega(std::move(w)) {
  if (omega.empty())
    throw std::domain_error("PoolWeights: weight vector must be nonempty");
  double total = 0.0;
  for (double v : omega) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("PoolWeights: entries must lie in [0,1]");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::domain_error("PoolWeights: entries must sum to 1, got " +
                            std::to_string(total));
  for (double& v : omega) v /= total;
}

std::size_t ForecastSeries::components_per_step() const {
  if (steps.empty())
    throw std::invalid_argument("ForecastSeries: series is empty");
  const std::size_t m = steps.front().components.size();
  for (std::size_t t = 1; t < steps.size(); ++t)
    if (steps[t].components.size() != m)
      throw std::invalid_argument(
          "ForecastSeries: component count varies at step " + std::to_string(t));
  return m;
}

namespace {

void check_lengths(const PoolWeights& w,
                   std::span<const ComponentForecast> components) {
  if (w.size() != components.size())
    throw std::invalid_argument(
        "pool: weight length " + std::to_string(w.size()) +
        " does not match component count " + std::to_string(components.size()));
}

}  // namespace

double pool_cdf(double y, const PoolWeights& w,
                std::span<const ComponentForecast> components) {
  check_lengths(w, components);
  double acc = 0.0;
  for (std::size_t m = 0; m < components.size(); ++m)
    acc += w[m] * components[m].cdf(y);
  return acc;
}

double pool_survival(double y, const PoolWeights& w,
                     std::span<const ComponentForecast> components) {
  check_lengths(w, components);
  double acc = 0.0;
  for (std::size_t m = 0; m < components.size(); ++m)
    acc += w[m] * components[m].survival(y);
  return acc;
}

double pool_pdf(double y, const PoolWeights& w,
                std::span<const ComponentForecast> components) {
  check_lengths(w, components);
  double acc = 0.0;
  for (std::size_t m = 0; m < components.size(); ++m)
    acc += w[m] * components[m].pdf(y);
  return acc;
}

double pool_inv_cdf(double q, const PoolWeights& w,
                    std::span<const ComponentForecast> components) {
  check_lengths(w, components);
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("pool_inv_cdf: q must lie in (0,1)");
  const double M = static_cast<double>(components.size());
  // Component quantiles at q/M and 1-(1-q)/M bracket the pool quantile; the
  // levels saturate at the representable interior so extreme q stays inside
  // the component quantile domain.
  const double ql = std::max(q / M, std::numeric_limits<double>::min());
  const double qh = std::min(1.0 - (1.0 - q) / M,
                             1.0 - 0.5 * std::numeric_limits<double>::epsilon());
  double lo = components[0].quantile(ql);
  double hi = components[0].quantile(qh);
  for (std::size_t m = 1; m < components.size(); ++m) {
    lo = std::min(lo, components[m].quantile(ql));
    hi = std::max(hi, components[m].quantile(qh));
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = pool_cdf(mid, w, components);
    if (std::fabs(fm - q) <= 1e-11 || hi - lo <= 1e-14 * (1.0 + std::fabs(mid)))
      return mid;
    (fm < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double clamp_to_unit_interior(double q) {
  const double lo = std::numeric_limits<double>::min();
  const double hi = 1.0 - 0.5 * std::numeric_limits<double>::epsilon();
  return std::min(std::max(q, lo), hi);
}

SeriesEval SeriesEval::from(const ForecastSeries& series) {
  SeriesEval se;
  se.T = series.size();
  se.M = series.components_per_step();
  se.cdf.resize(se.T * se.M);
  se.sf.resize(se.T * se.M);
  se.pdf.resize(se.T * se.M);
  for (std::size_t t = 0; t < se.T; ++t) {
    const ForecastStep& step = series.steps[t];
    for (std::size_t m = 0; m < se.M; ++m) {
      se.cdf[t * se.M + m] = step.components[m].cdf(step.y);
      se.sf[t * se.M + m] = step.components[m].survival(step.y);
      se.pdf[t * se.M + m] = step.components[m].pdf(step.y);
    }
  }
  return se;
}

double SeriesEval::H(std::size_t t, const PoolWeights& w) const {
  const double* row = cdf_row(t);
  double acc = 0.0;
  for (std::size_t m = 0; m < M; ++m) acc += w[m] * row[m];
  return acc;
}

double SeriesEval::S(std::size_t t, const PoolWeights& w) const {
  const double* row = sf_row(t);
  double acc = 0.0;
  for (std::size_t m = 0; m < M; ++m) acc += w[m] * row[m];
  return acc;
}

double SeriesEval::h(std::size_t t, const PoolWeights& w) const {
  const double* row = pdf_row(t);
  double acc = 0.0;
  for (std::size_t m = 0; m < M; ++m) acc += w[m] * row[m];
  return acc;
}

}  // namespace bmcal
