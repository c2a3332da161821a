#include <cmath>
#include <stdexcept>
#include <vector>

#include "bmcal/distributions.hpp"
#include "bmcal/errors.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace bmcal;

namespace {

// Tail mass above y by substitution t = y + s/(1-s), independent of the
// survival code under test.
double tail_mass_above(const ComponentForecast& c, double y) {
  return static_cast<double>(oracle::integrate_tanh_sinh(
      [&](long double s, long double) {
        const long double r = 1.0L / (1.0L - s);
        const double z = static_cast<double>(static_cast<long double>(y) + s * r);
        if (!std::isfinite(z)) return 0.0L;
        return static_cast<long double>(c.pdf(z)) * r * r;
      },
      0.0L, 1.0L));
}

}  // namespace

TEST_CASE("normal helpers match the erfc oracle") {
  for (double z : {-38.0, -8.5, -3.0, -0.7, 0.0, 0.4, 2.0, 9.0, 37.0}) {
    CHECK(norm_cdf(z) == doctest::Approx(oracle::normal_cdf(z)).epsilon(1e-13).scale(1e-300));
    CHECK(norm_pdf(z) == doctest::Approx(oracle::normal_pdf(z)).epsilon(1e-13).scale(1e-300));
  }
  for (double p : {1e-12, 1e-4, 0.3, 0.5, 0.97, 1.0 - 1e-10})
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-10));
}

TEST_CASE("normal component: cdf, survival, pdf, quantile") {
  const ComponentForecast c = ComponentForecast::make_normal(1.5, 2.0);
  for (double y : {-6.0, -1.0, 1.5, 3.2, 12.0}) {
    const double z = (y - 1.5) / 2.0;
    CHECK(c.cdf(y) == doctest::Approx(oracle::normal_cdf(z)).epsilon(1e-13));
    CHECK(c.pdf(y) == doctest::Approx(oracle::normal_pdf(z) / 2.0).epsilon(1e-13));
    CHECK(c.survival(y) == doctest::Approx(oracle::normal_cdf(-z)).epsilon(1e-13));
    CHECK(c.cdf(y) + c.survival(y) == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Deep-tail survival keeps relative precision where 1 - cdf loses it all.
  for (double y : {20.0, 40.0, 60.0}) {
    const double z = (y - 1.5) / 2.0;
    const double expected = oracle::normal_cdf(-z);
    CHECK(c.survival(y) == doctest::Approx(expected).epsilon(1e-11));
    CHECK(c.survival(-y) == doctest::Approx(1.0).epsilon(1e-15));
  }
  for (double q : {1e-9, 0.01, 0.5, 0.999, 1.0 - 1e-9})
    CHECK(c.cdf(c.quantile(q)) == doctest::Approx(q).epsilon(1e-9));
}

TEST_CASE("student_t component matches quadrature") {
  for (double dof : {1.0, 3.0, 6.0, 25.0}) {
    const ComponentForecast c = ComponentForecast::make_student_t(-0.5, 1.3, dof);
    for (double y : {-7.0, -0.5, 0.2, 4.0, 15.0}) {
      const double expected = oracle::student_t_cdf(y, -0.5, 1.3, dof);
      CHECK(c.cdf(y) == doctest::Approx(expected).epsilon(1e-11));
      CHECK(c.cdf(y) + c.survival(y) == doctest::Approx(1.0).epsilon(1e-13));
      const double z = (y + 0.5) / 1.3;
      const double lpdf =
          static_cast<double>(oracle::lgamma_ld(0.5L * (dof + 1.0)) -
                              oracle::lgamma_ld(0.5L * dof)) -
          0.5 * std::log(dof * std::acos(-1.0)) - std::log(1.3) -
          0.5 * (dof + 1.0) * std::log1p(z * z / dof);
      CHECK(c.pdf(y) == doctest::Approx(std::exp(lpdf)).epsilon(1e-12));
    }
    // Polynomial tail: survival at z = 50 is far above double rounding and
    // must match the direct tail integral.
    for (double y : {25.0, 65.0}) {
      const double expected = tail_mass_above(c, y);
      CHECK(c.survival(y) == doctest::Approx(expected).epsilon(1e-9));
    }
    for (double q : {1e-6, 0.2, 0.5, 0.8, 1.0 - 1e-6})
      CHECK(c.cdf(c.quantile(q)) == doctest::Approx(q).epsilon(1e-9));
  }
}

TEST_CASE("skew_normal component matches the Owen-T oracle") {
  for (double shape : {-4.0, -1.0, 0.0, 0.8, 3.0}) {
    const ComponentForecast c = ComponentForecast::make_skew_normal(0.7, 1.1, shape);
    for (double y : {-4.5, -0.3, 0.7, 1.9, 5.2}) {
      const double expected = oracle::skew_normal_cdf(y, 0.7, 1.1, shape);
      CHECK(c.cdf(y) == doctest::Approx(expected).epsilon(1e-9));
      const double expected_pdf = skew_normal_pdf(y, 0.7, 1.1, shape);
      const double z = (y - 0.7) / 1.1;
      const double direct =
          2.0 / 1.1 * oracle::normal_pdf(z) * oracle::normal_cdf(shape * z);
      CHECK(expected_pdf == doctest::Approx(direct).epsilon(1e-12));
      CHECK(c.pdf(y) == doctest::Approx(direct).epsilon(1e-12));
      CHECK(c.cdf(y) + c.survival(y) == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (double q : {1e-4, 0.5, 1.0 - 1e-4})
      CHECK(c.cdf(c.quantile(q)) == doctest::Approx(q).epsilon(1e-8));
    // Deep upper tail against the direct integral.
    for (double y : {9.0, 14.0}) {
      const double expected = tail_mass_above(c, y);
      if (expected > 1e-290)
        CHECK(c.survival(y) == doctest::Approx(expected).epsilon(1e-7));
    }
  }
}

TEST_CASE("truncated normal at zero") {
  const ComponentForecast c = ComponentForecast::make_truncated_normal(1.0, 2.0);
  const double denom = 1.0 - oracle::normal_cdf(-0.5);
  CHECK(c.cdf(-3.0) == 0.0);
  CHECK(c.cdf(0.0) == 0.0);
  CHECK(c.survival(-0.2) == 1.0);
  for (double y : {0.3, 1.0, 2.8, 7.0}) {
    const double z = (y - 1.0) / 2.0;
    const double expected = (oracle::normal_cdf(z) - oracle::normal_cdf(-0.5)) / denom;
    CHECK(c.cdf(y) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(c.pdf(y) ==
          doctest::Approx(oracle::normal_pdf(z) / 2.0 / denom).epsilon(1e-12));
    CHECK(c.cdf(y) + c.survival(y) == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK(c.pdf(-1.0) == 0.0);
  // Total mass is one.
  const double mass = static_cast<double>(oracle::integrate(
      [&](long double y) {
        return static_cast<long double>(c.pdf(static_cast<double>(y)));
      },
      0.0L, 60.0L, 1e-13L));
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  for (double q : {0.001, 0.4, 0.999})
    CHECK(c.cdf(c.quantile(q)) == doctest::Approx(q).epsilon(1e-9));
  CHECK(c.survival(30.0) ==
        doctest::Approx(oracle::normal_cdf(-14.5) / denom).epsilon(1e-11));
}

TEST_CASE("gev component") {
  for (double shape : {-0.2, 0.0, 0.15, 0.5}) {
    const ComponentForecast c = ComponentForecast::make_gev(0.4, 1.2, shape);
    for (double y : {-2.0, 0.0, 0.4, 1.7, 6.0}) {
      const double z = (y - 0.4) / 1.2;
      long double t;
      bool in_support = true;
      if (shape == 0.0) {
        t = std::exp(-static_cast<long double>(z));
      } else {
        const long double base = 1.0L + static_cast<long double>(shape) * z;
        if (base <= 0.0L) {
          in_support = false;
          t = 0.0L;
        } else {
          t = std::pow(base, -1.0L / static_cast<long double>(shape));
        }
      }
      if (in_support) {
        const double expected = static_cast<double>(std::exp(-t));
        CHECK(c.cdf(y) == doctest::Approx(expected).epsilon(1e-13));
        const double expected_sf = static_cast<double>(-std::expm1(-t));
        CHECK(c.survival(y) == doctest::Approx(expected_sf).epsilon(1e-12).scale(1e-300));
        const double h = 1e-7;
        if (c.pdf(y) > 1e-12) {
          const double deriv = (c.cdf(y + h) - c.cdf(y - h)) / (2.0 * h);
          CHECK(c.pdf(y) == doctest::Approx(deriv).epsilon(1e-5));
        }
      } else {
        const double boundary = shape > 0.0 ? 0.0 : 1.0;
        CHECK(c.cdf(y) == boundary);
      }
    }
    for (double q : {1e-5, 0.3, 0.9, 1.0 - 1e-6})
      CHECK(c.cdf(c.quantile(q)) == doctest::Approx(q).epsilon(1e-9));
  }
  // Heavy upper tail at positive shape: survival keeps relative accuracy.
  const ComponentForecast heavy = ComponentForecast::make_gev(0.0, 1.0, 0.3);
  for (double y : {50.0, 500.0}) {
    const double t = std::pow(1.0 + 0.3 * y, -1.0 / 0.3);
    CHECK(heavy.survival(y) == doctest::Approx(-std::expm1(-t)).epsilon(1e-12));
  }
}

TEST_CASE("grid component interpolates its knots") {
  const std::vector<double> x = {-1.0, 0.0, 2.0, 5.0};
  const std::vector<double> f = {0.0, 0.25, 0.7, 1.0};
  const ComponentForecast c = ComponentForecast::make_grid(x, f);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(c.cdf(x[i]) == doctest::Approx(f[i]).epsilon(1e-15));
  CHECK(c.cdf(-0.5) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(c.cdf(1.0) == doctest::Approx(0.25 + 0.45 / 2.0).epsilon(1e-15));
  CHECK(c.cdf(-2.0) == 0.0);
  CHECK(c.cdf(6.0) == 1.0);
  CHECK(c.survival(6.0) == 0.0);
  CHECK(c.survival(-2.0) == 1.0);
  CHECK(c.cdf(1.0) + c.survival(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // pdf is the local slope.
  CHECK(c.pdf(-0.5) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(c.pdf(1.0) == doctest::Approx(0.45 / 2.0).epsilon(1e-13));
  CHECK(c.pdf(3.0) == doctest::Approx(0.3 / 3.0).epsilon(1e-13));
  CHECK(c.pdf(-3.0) == 0.0);
  for (double q : {0.1, 0.25, 0.5, 0.97})
    CHECK(c.cdf(c.quantile(q)) == doctest::Approx(q).epsilon(1e-10));
}

TEST_CASE("component validation names the offending parameter") {
  ComponentForecast c = ComponentForecast::make_normal(0.0, 1.0);
  c.scale = -1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("scale"), std::domain_error);
  ComponentForecast t = ComponentForecast::make_student_t(0.0, 1.0, 4.0);
  t.dof = 0.0;
  CHECK_THROWS_WITH_AS(t.validate(), doctest::Contains("dof"), std::domain_error);
  CHECK_THROWS_AS(ComponentForecast::make_grid({0.0, 1.0}, {0.2, 1.0}).validate(),
                  std::domain_error);
  CHECK_THROWS_AS(ComponentForecast::make_grid({1.0, 0.0}, {0.0, 1.0}).validate(),
                  std::domain_error);
  CHECK_THROWS_AS(ComponentForecast::make_grid({0.0, 1.0, 2.0}, {0.0, 0.8, 0.7}).validate(),
                  std::domain_error);
  CHECK_NOTHROW(ComponentForecast::make_grid({0.0, 1.0}, {0.0, 1.0}).validate());
  ComponentForecast g = ComponentForecast::make_gev(0.0, 1.0, 0.1);
  CHECK_NOTHROW(g.validate());
  g.scale = 0.0;
  CHECK_THROWS_AS(g.validate(), std::domain_error);
}

TEST_CASE("family names round-trip") {
  for (Family f : {Family::normal, Family::student_t, Family::skew_normal,
                   Family::truncated_normal_at_zero, Family::gev, Family::grid})
    CHECK(family_from_name(family_name(f)) == f);
  CHECK_THROWS_AS(family_from_name("cauchy"), ParseError);
}
