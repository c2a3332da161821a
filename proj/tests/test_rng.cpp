#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bmcal/rng.hpp"
#include "doctest.h"

using namespace bmcal;

TEST_CASE("uniform stays strictly inside (0,1) with the right moments") {
  Rng rng(123);
  const std::size_t n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double se_mean = std::sqrt(1.0 / 12.0 / n);
  CHECK(std::fabs(mean - 0.5) < 4.0 * se_mean);
  CHECK(std::fabs(var - 1.0 / 12.0) < 0.001);
  Rng shifted(123);
  CHECK(shifted.uniform(2.0, 6.0) == doctest::Approx(2.0 + 4.0 * Rng(123).uniform()));
}

TEST_CASE("fixed seeds reproduce streams bit for bit") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double ua = a.uniform();
    const double ub = b.uniform();
    const double uc = c.uniform();
    all_equal = all_equal && (ua == ub);
    any_diff = any_diff || (ua != uc);
  }
  CHECK(all_equal);
  CHECK(any_diff);
  Rng d(7), e(7);
  for (int i = 0; i < 100; ++i) CHECK(d.normal() == e.normal());
  std::vector<double> conc = {1.0, 2.0, 3.0};
  CHECK(d.dirichlet(conc) == e.dirichlet(conc));
}

TEST_CASE("derive_seed separates substreams deterministically") {
  const std::uint64_t master = 987654321;
  CHECK(Rng::derive_seed(master, 1) == Rng::derive_seed(master, 1));
  CHECK(Rng::derive_seed(master, 1) != Rng::derive_seed(master, 2));
  CHECK(Rng::derive_seed(master, 1) != Rng::derive_seed(master + 1, 1));
  // Streams must not collide over a realistic window count.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4000; ++s)
    seen.push_back(Rng::derive_seed(master, s));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("gamma shape/rate moments and underflow clamp") {
  Rng rng(5);
  const std::size_t n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = rng.gamma(3.0, 2.0);
    REQUIRE(g > 0.0);
    sum += g;
    sum2 += g * g;
  }
  const double mean = sum / n;                  // 3/2
  const double var = sum2 / n - mean * mean;    // 3/4
  CHECK(std::fabs(mean - 1.5) < 4.0 * std::sqrt(0.75 / n));
  CHECK(std::fabs(var - 0.75) < 0.05);
  // Tiny shapes underflow in the std generator; draws stay positive and
  // log-able.
  for (int i = 0; i < 20000; ++i) {
    const double g = rng.gamma(0.05, 0.05);
    REQUIRE(g > 0.0);
    REQUIRE(std::isfinite(std::log(g)));
  }
}

TEST_CASE("beta moments") {
  Rng rng(11);
  const std::size_t n = 100000;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.beta(2.0, 5.0);
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  const double mean = sum / n;  // 2/7
  const double sd = std::sqrt(2.0 * 5.0 / (49.0 * 8.0));
  CHECK(std::fabs(mean - 2.0 / 7.0) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("dirichlet draws live on the simplex with mean xi/sum") {
  Rng rng(17);
  const std::vector<double> conc = {1.0, 2.0, 7.0};
  const std::size_t n = 50000;
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> w = rng.dirichlet(conc);
    REQUIRE(w.size() == 3);
    double total = 0.0;
    for (double v : w) {
      REQUIRE(v >= 0.0);
      total += v;
    }
    REQUIRE(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t m = 0; m < 3; ++m) mean[m] += w[m];
  }
  for (std::size_t m = 0; m < 3; ++m) {
    mean[m] /= n;
    const double expected = conc[m] / 10.0;
    const double sd = std::sqrt(expected * (1.0 - expected) / 11.0);
    CHECK(std::fabs(mean[m] - expected) <
          4.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("student_t variance") {
  Rng rng(29);
  const std::size_t n = 200000;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.student_t(5.0);
    sum2 += t * t;
  }
  // var = 5/3; the empirical variance of t(5) converges slowly, so the
  // tolerance is loose.
  CHECK(sum2 / n == doctest::Approx(5.0 / 3.0).epsilon(0.06));
}

TEST_CASE("sample_categorical_log draws in proportion and handles -inf") {
  const double ninf = -std::numeric_limits<double>::infinity();
  Rng rng(3);
  std::vector<double> logw = {ninf, 0.0, std::log(2.0)};
  std::vector<long> counts(3, 0);
  const long n = 90000;
  for (long i = 0; i < n; ++i) {
    const int k = sample_categorical_log(logw, rng);
    REQUIRE(k >= 1);
    REQUIRE(k <= 2);
    ++counts[static_cast<std::size_t>(k)];
  }
  CHECK(counts[0] == 0);
  const double p1 = static_cast<double>(counts[1]) / n;  // 1/3
  CHECK(std::fabs(p1 - 1.0 / 3.0) < 4.0 * std::sqrt(2.0 / 9.0 / n));

  // Max subtraction keeps huge magnitudes finite.
  std::vector<double> big = {1000.0, 1001.0};
  std::vector<long> big_counts(2, 0);
  for (long i = 0; i < n; ++i)
    ++big_counts[static_cast<std::size_t>(sample_categorical_log(big, rng))];
  const double expected = 1.0 / (1.0 + std::exp(1.0));
  CHECK(std::fabs(static_cast<double>(big_counts[0]) / n - expected) <
        4.0 * std::sqrt(expected * (1.0 - expected) / n));

  std::vector<double> none = {ninf, ninf};
  CHECK(sample_categorical_log(none, rng) == -1);
}
