#include "bmcal/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace bmcal {

namespace {

constexpr std::size_t kMarWarmup = 200;

ForecastStep fixed_pair_step(double y) {
  ForecastStep step;
  step.components = {ComponentForecast::make_normal(-1.0, 1.0),
                     ComponentForecast::make_normal(2.0, 1.0)};
  step.y = y;
  return step;
}

}  // namespace

double sample_skew_normal(double location, double scale, double shape, Rng& rng) {
  // Conditioning representation: z = delta |z0| + sqrt(1-delta^2) z1.
  const double delta = shape / std::sqrt(1.0 + shape * shape);
  const double z0 = rng.normal();
  const double z1 = rng.normal();
  const double z = delta * std::fabs(z0) + std::sqrt(1.0 - delta * delta) * z1;
  return location + scale * z;
}

ForecastSeries generate_sim1(const std::array<double, 3>& p, std::size_t T,
                             std::uint64_t seed) {
  const double total = p[0] + p[1] + p[2];
  if (!(p[0] >= 0.0 && p[1] >= 0.0 && p[2] >= 0.0) ||
      std::fabs(total - 1.0) > 1e-12)
    throw std::domain_error("generate_sim1: p must lie on the 3-simplex");
  if (T < 1) throw std::domain_error("generate_sim1: T must be >= 1");
  static const double means[3] = {-2.0, 0.0, 2.0};
  Rng rng(seed);
  ForecastSeries series;
  series.steps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double u = rng.uniform();
    const int c = u <= p[0] ? 0 : (u <= p[0] + p[1] ? 1 : 2);
    const double y = means[c] + 0.5 * rng.normal();
    series.steps.push_back(fixed_pair_step(y));
  }
  return series;
}

ForecastSeries generate_sim2(std::size_t T, std::uint64_t seed) {
  if (T < 1) throw std::domain_error("generate_sim2: T must be >= 1");
  Rng rng(seed);
  ForecastSeries series;
  series.steps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const double loc = rng.uniform() <= 0.5 ? -1.0 : 2.0;
    const double y = loc + rng.student_t(6.0);
    series.steps.push_back(fixed_pair_step(y));
  }
  return series;
}

ForecastSeries generate_mar(double phi, double rho, std::size_t T,
                            std::uint64_t seed) {
  if (T < 1) throw std::domain_error("generate_mar: T must be >= 1");
  if (!std::isfinite(phi) || !std::isfinite(rho))
    throw std::domain_error("generate_mar: phi and rho must be finite");
  Rng rng(seed);
  ForecastSeries series;
  series.steps.reserve(T);
  double y_prev = 0.0;
  for (std::size_t t = 0; t < kMarWarmup + T; ++t) {
    const double base = rng.uniform() <= 1.0 / 3.0 ? -2.0 : 2.0;
    const double y = sample_skew_normal(base + phi * y_prev, 0.5, rho, rng);
    if (t >= kMarWarmup) {
      ForecastStep step;
      step.components = {
          ComponentForecast::make_normal(-1.0 + phi * y_prev, 0.5),
          ComponentForecast::make_normal(2.0 + phi * y_prev, 0.5)};
      step.y = y;
      series.steps.push_back(std::move(step));
    }
    y_prev = y;
  }
  return series;
}

}  // namespace bmcal
