#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bmcal/kernels.hpp"
#include "bmcal/model.hpp"
#include "bmcal/rng.hpp"
#include "bmcal/simulate.hpp"

using namespace bmcal;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::vector<DrawParams> synthetic_draws(std::size_t n, std::size_t K,
                                        std::size_t M, Rng& rng) {
  Hyperparams hyper;
  std::vector<DrawParams> draws(n);
  for (DrawParams& d : draws) {
    FiniteParams p = prior_sample(hyper, K, M, rng);
    d.w = std::move(p.w);
    d.atoms = std::move(p.atoms);
  }
  return draws;
}

}  // namespace

int main() {
  constexpr std::size_t kT = 500, kDraws = 400, kK = 3, kM = 2, kGrid = 4096;
  constexpr int kReps = 3;

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; parallel entry points run serially\n");
#endif

  Rng rng(20240817);
  const ForecastSeries series = generate_sim1({0.2, 0.2, 0.6}, kT, 31);
  const SeriesEval se = SeriesEval::from(series);
  const std::vector<DrawParams> draws = synthetic_draws(kDraws, kK, kM, rng);

  std::vector<double> pit_s(kDraws * kT), lp_s(kDraws * kT);
  std::vector<double> pit_p(kDraws * kT), lp_p(kDraws * kT);

  double t_serial = 1e300, t_parallel = 1e300;
  for (int r = 0; r < kReps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    eval_draw_matrices_serial(draws, se, pit_s, lp_s);
    t_serial = std::min(t_serial, seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    eval_draw_matrices(draws, se, pit_p, lp_p);
    t_parallel = std::min(t_parallel, seconds_since(t0));
  }
  const bool eval_match = pit_s == pit_p && lp_s == lp_p;
  std::printf("eval_draw_matrices  %zu draws x %zu steps: serial %.3fs, parallel %.3fs, speedup %.2fx, bitwise %s\n",
              kDraws, kT, t_serial, t_parallel, t_serial / t_parallel,
              eval_match ? "equal" : "DIFFERENT");

  std::vector<MixtureEntry> entries;
  for (const DrawParams& d : draws)
    for (std::size_t k = 0; k < kK; ++k)
      entries.push_back({d.w[k] / static_cast<double>(kDraws), d.atoms[k]});
  std::vector<double> ys(kGrid);
  for (std::size_t g = 0; g < kGrid; ++g)
    ys[g] = -6.0 + 12.0 * static_cast<double>(g) / static_cast<double>(kGrid - 1);
  std::vector<double> cdf_s(kGrid), pdf_s(kGrid), cdf_p(kGrid), pdf_p(kGrid);

  double c_serial = 1e300, c_parallel = 1e300;
  for (int r = 0; r < kReps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    mixture_curve_serial(entries, series.steps[0].components, ys, cdf_s, pdf_s);
    c_serial = std::min(c_serial, seconds_since(t0));
    t0 = std::chrono::steady_clock::now();
    mixture_curve(entries, series.steps[0].components, ys, cdf_p, pdf_p);
    c_parallel = std::min(c_parallel, seconds_since(t0));
  }
  const bool curve_match = cdf_s == cdf_p && pdf_s == pdf_p;
  std::printf("mixture_curve       %zu entries x %zu nodes: serial %.3fs, parallel %.3fs, speedup %.2fx, bitwise %s\n",
              entries.size(), kGrid, c_serial, c_parallel,
              c_serial / c_parallel, curve_match ? "equal" : "DIFFERENT");

  return eval_match && curve_match ? 0 : 1;
}
