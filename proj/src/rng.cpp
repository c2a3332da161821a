#include "bmcal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmcal {

double Rng::uniform() {
  // 53-bit mantissa draw in [0,1); reject exact zeros so logs stay finite.
  double u;
  do {
    u = (eng_() >> 11) * 0x1.0p-53;
  } while (u <= 0.0);
  return u;
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("Rng::gamma: shape and rate must be positive");
  double g = std::gamma_distribution<double>{shape, 1.0 / rate}(eng_);
  if (g <= 0.0) g = std::numeric_limits<double>::min();
  return g;
}

double Rng::beta(double a, double b) {
  const double g1 = gamma(a, 1.0);
  const double g2 = gamma(b, 1.0);
  double r = g1 / (g1 + g2);
  // keep strictly inside (0,1) so downstream logit/log transforms stay finite
  if (r >= 1.0) r = 1.0 - 1e-16;
  if (r <= 0.0) r = 1e-300;
  return r;
}

std::vector<double> Rng::dirichlet(std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  double total = 0.0;
  for (std::size_t i = 0; i < concentration.size(); ++i) {
    out[i] = gamma(concentration[i], 1.0);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int sample_categorical_log(std::span<const double> logw, Rng& rng) {
  const double m = *std::max_element(logw.begin(), logw.end());
  if (m == -std::numeric_limits<double>::infinity()) return -1;
  double total = 0.0;
  std::vector<double> cum(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) {
    total += std::exp(logw[i] - m);
    cum[i] = total;
  }
  const double u = rng.uniform() * total;
  for (std::size_t i = 0; i < cum.size(); ++i)
    if (u <= cum[i]) return static_cast<int>(i);
  return static_cast<int>(cum.size()) - 1;
}

}  // namespace bmcal
