#pragma once

#include <span>
#include <vector>

#include "bmcal/model.hpp"
#include "bmcal/pool.hpp"

namespace bmcal {

// One posterior draw reduced to what evaluation needs: normalized mixture
// weights and their calibration atoms.
struct DrawParams {
  std::vector<double> w;
  std::vector<CalibrationAtom> atoms;
};

// Weighted calibration atom of a flattened draws x atoms mixture.
struct MixtureEntry {
  double weight;
  CalibrationAtom atom;
};

// Per-draw PIT and log predictive density at every observation:
// pit[i*T + t] = sum_k w_k B*(H_t | omega_k),
// logpdf[i*T + t] = log sum_k w_k b*(H_t) h_t.
// The parallel variants split over draws and write element-wise, so serial
// and OpenMP results agree bit for bit.
void eval_draw_matrices_serial(std::span<const DrawParams> draws,
                               const SeriesEval& se, std::span<double> pit,
                               std::span<double> logpdf);
void eval_draw_matrices(std::span<const DrawParams> draws, const SeriesEval& se,
                        std::span<double> pit, std::span<double> logpdf);

// Mixture predictive cdf (and optionally pdf) on a grid of y values.
void mixture_curve_serial(std::span<const MixtureEntry> entries,
                          std::span<const ComponentForecast> components,
                          std::span<const double> ys, std::span<double> cdf_out,
                          std::span<double> pdf_out);
void mixture_curve(std::span<const MixtureEntry> entries,
                   std::span<const ComponentForecast> components,
                   std::span<const double> ys, std::span<double> cdf_out,
                   std::span<double> pdf_out);

}  // namespace bmcal
