#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bmcal {

// Seeded RNG wrapper.  All stochastic code draws through this class so that a
// fixed seed reproduces a run bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() { return std::normal_distribution<double>{}(eng_); }

  // Gamma with shape/rate convention; underflows are clamped to the smallest
  // positive normal so downstream densities stay defined.
  double gamma(double shape, double rate);

  double beta(double a, double b);

  std::vector<double> dirichlet(std::span<const double> concentration);

  double student_t(double dof) {
    return std::student_t_distribution<double>{dof}(eng_);
  }

  std::uint64_t raw() { return eng_(); }

  // Deterministic substream seed (splitmix64 over master ^ stream index).
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

 private:
  std::mt19937_64 eng_;
};

// Draw an index proportional to exp(logw) with max-subtraction; returns -1
// when every entry is -inf.
int sample_categorical_log(std::span<const double> logw, Rng& rng);

}  // namespace bmcal
