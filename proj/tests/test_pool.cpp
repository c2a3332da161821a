#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bmcal/pool.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bmcal;

namespace {

std::vector<ComponentForecast> two_normals() {
  return {ComponentForecast::make_normal(-1.0, 1.0),
          ComponentForecast::make_normal(2.0, 1.0)};
}

}  // namespace

TEST_CASE("PoolWeights validates and renormalizes") {
  CHECK_THROWS_AS(PoolWeights({0.5, 0.4}), std::domain_error);
  CHECK_THROWS_AS(PoolWeights({-0.1, 1.1}), std::domain_error);
  CHECK_THROWS_AS(PoolWeights(std::vector<double>{}), std::domain_error);
  const PoolWeights w({0.3, 0.7});
  CHECK(w.size() == 2);
  CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-15));
  // A sum off by strictly less than the 1e-12 gate comes out exact.
  const PoolWeights nudged({0.3 + 4e-13, 0.7});
  double total = 0.0;
  for (double v : nudged.omega) total += v;
  CHECK(std::fabs(total - 1.0) <= 1e-16);
}

TEST_CASE("pool cdf/pdf are the convex combination of the components") {
  const std::vector<ComponentForecast> comps = two_normals();
  const PoolWeights w({0.4, 0.6});
  for (double y : {-4.0, -1.0, 0.3, 2.0, 5.5}) {
    const double expected_cdf = 0.4 * oracle::normal_cdf(y + 1.0) +
                                0.6 * oracle::normal_cdf(y - 2.0);
    const double expected_pdf = 0.4 * oracle::normal_pdf(y + 1.0) +
                                0.6 * oracle::normal_pdf(y - 2.0);
    CHECK(pool_cdf(y, w, comps) == doctest::Approx(expected_cdf).epsilon(1e-13));
    CHECK(pool_pdf(y, w, comps) == doctest::Approx(expected_pdf).epsilon(1e-13));
  }
}

TEST_CASE("pool survival complements the cdf with full tail precision") {
  const std::vector<ComponentForecast> comps = two_normals();
  const PoolWeights w({0.4, 0.6});
  for (double y : {-3.0, 0.0, 2.5, 6.0})
    CHECK(pool_cdf(y, w, comps) + pool_survival(y, w, comps) ==
          doctest::Approx(1.0).epsilon(1e-15));
  for (double y : {12.0, 25.0, 38.0}) {
    const double expected = 0.4 * oracle::normal_cdf(-(y + 1.0)) +
                            0.6 * oracle::normal_cdf(-(y - 2.0));
    CHECK(pool_survival(y, w, comps) == doctest::Approx(expected).epsilon(1e-11));
  }
}

TEST_CASE("pool_inv_cdf round-trips") {
  const std::vector<ComponentForecast> comps = two_normals();
  const PoolWeights w({0.25, 0.75});
  for (double q : {1e-8, 1e-4, 0.2, 0.5, 0.77, 1.0 - 1e-4, 1.0 - 1e-8}) {
    const double y = pool_inv_cdf(q, w, comps);
    CHECK(std::fabs(pool_cdf(y, w, comps) - q) <= 1e-10);
  }
  // Levels an ulp from the endpoints stay inside the component domain.
  const double eps = std::numeric_limits<double>::epsilon();
  CHECK(std::isfinite(pool_inv_cdf(1.0 - 0.5 * eps, w, comps)));
  CHECK(std::isfinite(pool_inv_cdf(std::numeric_limits<double>::min(), w, comps)));
  CHECK_THROWS_AS(pool_inv_cdf(0.0, w, comps), std::domain_error);
  CHECK_THROWS_AS(pool_inv_cdf(1.0, w, comps), std::domain_error);
}

TEST_CASE("clamp_to_unit_interior pins endpoint roundings inward") {
  const double eps = std::numeric_limits<double>::epsilon();
  CHECK(clamp_to_unit_interior(0.0) == std::numeric_limits<double>::min());
  CHECK(clamp_to_unit_interior(1.0) == 1.0 - 0.5 * eps);
  CHECK(clamp_to_unit_interior(1.0 - 0.5 * eps) == 1.0 - 0.5 * eps);
  CHECK(clamp_to_unit_interior(0.37) == 0.37);
  CHECK(clamp_to_unit_interior(1.0 - 0.5 * eps) < 1.0);
}

TEST_CASE("SeriesEval caches the component values at the observations") {
  ForecastSeries series;
  for (double y : {-2.0, 0.1, 1.4, 3.3}) {
    ForecastStep step;
    step.components = two_normals();
    step.y = y;
    series.steps.push_back(std::move(step));
  }
  const SeriesEval se = SeriesEval::from(series);
  REQUIRE(se.T == 4);
  REQUIRE(se.M == 2);
  for (std::size_t t = 0; t < se.T; ++t)
    for (std::size_t m = 0; m < se.M; ++m) {
      const ComponentForecast& c = series.steps[t].components[m];
      const double y = series.steps[t].y;
      CHECK(se.cdf_row(t)[m] == c.cdf(y));
      CHECK(se.sf_row(t)[m] == c.survival(y));
      CHECK(se.pdf_row(t)[m] == c.pdf(y));
    }
  const PoolWeights w({0.55, 0.45});
  for (std::size_t t = 0; t < se.T; ++t) {
    const double y = series.steps[t].y;
    CHECK(se.H(t, w) == doctest::Approx(pool_cdf(y, w, series.steps[t].components))
                            .epsilon(1e-15));
    CHECK(se.S(t, w) ==
          doctest::Approx(pool_survival(y, w, series.steps[t].components))
              .epsilon(1e-15));
    CHECK(se.h(t, w) == doctest::Approx(pool_pdf(y, w, series.steps[t].components))
                            .epsilon(1e-15));
    CHECK(se.H(t, w) + se.S(t, w) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("components_per_step rejects ragged series") {
  ForecastSeries series;
  ForecastStep a;
  a.components = two_normals();
  series.steps.push_back(a);
  CHECK(series.components_per_step() == 2);
  ForecastStep b;
  b.components = {ComponentForecast::make_normal(0.0, 1.0)};
  series.steps.push_back(b);
  CHECK_THROWS_AS(series.components_per_step(), std::invalid_argument);
}
