#include "bmcal/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmcal/special_fns.hpp"

namespace bmcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_beta_fn(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

// PIT and log density of a single draw at observation t.
inline void eval_one(const DrawParams& d, const SeriesEval& se, std::size_t t,
                     std::span<const double> lB, double& pit, double& logpdf) {
  double cdf_acc = 0.0;
  double max_lk = kNegInf;
  thread_local std::vector<double> lk;
  lk.resize(d.atoms.size());
  for (std::size_t k = 0; k < d.atoms.size(); ++k) {
    const CalibrationAtom& atom = d.atoms[k];
    const double H = se.H(t, atom.omega);
    const double S = se.S(t, atom.omega);
    const double h = se.h(t, atom.omega);
    cdf_acc += d.w[k] *
               reg_inc_beta_pair(H, S, atom.cal.alpha(), atom.cal.beta());
    if (d.w[k] > 0.0 && h > 0.0 && H > 0.0 && S > 0.0)
      lk[k] = std::log(d.w[k]) + (atom.cal.alpha() - 1.0) * std::log(H) +
              (atom.cal.beta() - 1.0) * std::log(S) - lB[k] + std::log(h);
    else
      lk[k] = kNegInf;
    max_lk = std::max(max_lk, lk[k]);
  }
  pit = cdf_acc;
  if (max_lk == kNegInf) {
    logpdf = kNegInf;
    return;
  }
  double s = 0.0;
  for (double v : lk) s += std::exp(v - max_lk);
  logpdf = max_lk + std::log(s);
}

void eval_rows(std::span<const DrawParams> draws, const SeriesEval& se,
               std::span<double> pit, std::span<double> logpdf, bool parallel) {
  const std::size_t I = draws.size();
  const std::size_t T = se.T;
  if (pit.size() != I * T || logpdf.size() != I * T)
    throw std::invalid_argument("eval_draw_matrices: output size mismatch");

#pragma omp parallel for schedule(dynamic, 8) if (parallel)
  for (long i = 0; i < static_cast<long>(I); ++i) {
    const DrawParams& d = draws[static_cast<std::size_t>(i)];
    std::vector<double> lB(d.atoms.size());
    for (std::size_t k = 0; k < d.atoms.size(); ++k)
      lB[k] = log_beta_fn(d.atoms[k].cal.alpha(), d.atoms[k].cal.beta());
    for (std::size_t t = 0; t < T; ++t)
      eval_one(d, se, t, lB, pit[static_cast<std::size_t>(i) * T + t],
               logpdf[static_cast<std::size_t>(i) * T + t]);
  }
}

void curve_rows(std::span<const MixtureEntry> entries,
                std::span<const ComponentForecast> components,
                std::span<const double> ys, std::span<double> cdf_out,
                std::span<double> pdf_out, bool parallel) {
  if (cdf_out.size() != ys.size())
    throw std::invalid_argument("mixture_curve: cdf output size mismatch");
  const bool want_pdf = !pdf_out.empty();
  if (want_pdf && pdf_out.size() != ys.size())
    throw std::invalid_argument("mixture_curve: pdf output size mismatch");

  std::vector<double> lB(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k)
    lB[k] = log_beta_fn(entries[k].atom.cal.alpha(), entries[k].atom.cal.beta());

#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < static_cast<long>(ys.size()); ++i) {
    const double y = ys[static_cast<std::size_t>(i)];
    thread_local std::vector<double> Fm, Sm, fm;
    Fm.resize(components.size());
    Sm.resize(components.size());
    fm.resize(components.size());
    for (std::size_t m = 0; m < components.size(); ++m) {
      Fm[m] = components[m].cdf(y);
      Sm[m] = components[m].survival(y);
      if (want_pdf) fm[m] = components[m].pdf(y);
    }
    double cdf_acc = 0.0, pdf_acc = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const MixtureEntry& e = entries[k];
      double H = 0.0, S = 0.0, h = 0.0;
      for (std::size_t m = 0; m < components.size(); ++m) {
        H += e.atom.omega[m] * Fm[m];
        S += e.atom.omega[m] * Sm[m];
        if (want_pdf) h += e.atom.omega[m] * fm[m];
      }
      const double a = e.atom.cal.alpha();
      const double b = e.atom.cal.beta();
      cdf_acc += e.weight * reg_inc_beta_pair(H, S, a, b);
      if (want_pdf && h > 0.0 && H > 0.0 && S > 0.0)
        pdf_acc += e.weight * std::exp((a - 1.0) * std::log(H) +
                                       (b - 1.0) * std::log(S) - lB[k] +
                                       std::log(h));
    }
    cdf_out[static_cast<std::size_t>(i)] = cdf_acc;
    if (want_pdf) pdf_out[static_cast<std::size_t>(i)] = pdf_acc;
  }
}

}  // namespace

void eval_draw_matrices_serial(std::span<const DrawParams> draws,
                               const SeriesEval& se, std::span<double> pit,
                               std::span<double> logpdf) {
  eval_rows(draws, se, pit, logpdf, false);
}

void eval_draw_matrices(std::span<const DrawParams> draws, const SeriesEval& se,
                        std::span<double> pit, std::span<double> logpdf) {
  eval_rows(draws, se, pit, logpdf, true);
}

void mixture_curve_serial(std::span<const MixtureEntry> entries,
                          std::span<const ComponentForecast> components,
                          std::span<const double> ys, std::span<double> cdf_out,
                          std::span<double> pdf_out) {
  curve_rows(entries, components, ys, cdf_out, pdf_out, false);
}

void mixture_curve(std::span<const MixtureEntry> entries,
                   std::span<const ComponentForecast> components,
                   std::span<const double> ys, std::span<double> cdf_out,
                   std::span<double> pdf_out) {
  curve_rows(entries, components, ys, cdf_out, pdf_out, true);
}

}  // namespace bmcal
