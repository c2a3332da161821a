#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bmcal/distributions.hpp"

namespace bmcal {

// Point on the M-simplex; entries must sum to one within 1e-12 and are then
// renormalized so the sum holds to rounding.
struct PoolWeights {
  std::vector<double> omega;

  PoolWeights() = default;
  explicit PoolWeights(std::vector<double> w);

  std::size_t size() const { return omega.size(); }
  double operator[](std::size_t m) const { return omega[m]; }
};

// One time step: the component forecast tuple and the realized value.
struct ForecastStep {
  std::vector<ComponentForecast> components;
  double y = 0.0;
};

struct ForecastSeries {
  std::vector<ForecastStep> steps;

  std::size_t size() const { return steps.size(); }
  // Components per step; throws when the count varies across steps.
  std::size_t components_per_step() const;
};

double pool_cdf(double y, const PoolWeights& w,
                std::span<const ComponentForecast> components);
// Pool survival from component survivals; the accurate complement of
// pool_cdf near one.
double pool_survival(double y, const PoolWeights& w,
                     std::span<const ComponentForecast> components);
double pool_pdf(double y, const PoolWeights& w,
                std::span<const ComponentForecast> components);

// Inverse of pool_cdf by bisection; |pool_cdf(y) - q| <= 1e-10 where the pool
// cdf is continuous and strictly increasing.
double pool_inv_cdf(double q, const PoolWeights& w,
                    std::span<const ComponentForecast> components);

// Nearest level inside (0,1) at double resolution; beta draws from
// near-degenerate shapes round to the endpoints and would fall outside the
// inverse-cdf domain.
double clamp_to_unit_interior(double q);

// Component cdf/survival/pdf values at the realized observations, row-major
// T x M.  Samplers and PIT evaluation only ever need the components at the
// y_t, so these matrices are computed once per series.
struct SeriesEval {
  std::size_t T = 0;
  std::size_t M = 0;
  std::vector<double> cdf;
  std::vector<double> sf;
  std::vector<double> pdf;

  static SeriesEval from(const ForecastSeries& series);

  const double* cdf_row(std::size_t t) const { return cdf.data() + t * M; }
  const double* sf_row(std::size_t t) const { return sf.data() + t * M; }
  const double* pdf_row(std::size_t t) const { return pdf.data() + t * M; }

  double H(std::size_t t, const PoolWeights& w) const;
  double S(std::size_t t, const PoolWeights& w) const;
  double h(std::size_t t, const PoolWeights& w) const;
};

}  // namespace bmcal
