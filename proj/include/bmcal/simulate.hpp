#pragma once

#include <array>
#include <cstdint>

#include "bmcal/pool.hpp"
#include "bmcal/rng.hpp"

namespace bmcal {

// Three-component normal mixture data (means -2, 0, 2, variance 0.25) with
// the fixed misspecified forecast pair N(-1,1), N(2,1).
ForecastSeries generate_sim1(const std::array<double, 3>& p, std::size_t T,
                             std::uint64_t seed);

// Equal mixture of Student-t(6) at locations -1 and 2 (unit scale), same
// forecast pair.
ForecastSeries generate_sim2(std::size_t T, std::uint64_t seed);

// Skew-normal autoregressive mixture: regime i shifts by phi * y_{t-1}; the
// forecasts N(-1 + phi y_{t-1}, 0.25), N(2 + phi y_{t-1}, 0.25) track the
// lagged value.
ForecastSeries generate_mar(double phi, double rho, std::size_t T,
                            std::uint64_t seed);

double sample_skew_normal(double location, double scale, double shape, Rng& rng);

}  // namespace bmcal
