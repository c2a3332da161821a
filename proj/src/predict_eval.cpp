#include "bmcal/predict_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmcal/errors.hpp"
#include "bmcal/special_fns.hpp"

namespace bmcal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kCrpsNodes = 4097;
constexpr double kCrpsTail = 1e-6;

// Type-7 empirical quantile (linear interpolation) of sorted values.
double sorted_quantile(std::span<const double> sorted, double q) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = q * static_cast<double>(n - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

MixturePredictive MixturePredictive::from_finite(
    const FiniteTrace& trace, std::span<const ComponentForecast> components) {
  if (trace.draws.empty())
    throw std::invalid_argument("MixturePredictive: trace has no draws");
  MixturePredictive p;
  p.components_.assign(components.begin(), components.end());
  p.draw_count_ = trace.draws.size();
  const double inv = 1.0 / static_cast<double>(trace.draws.size());
  for (const FiniteParams& d : trace.draws)
    for (std::size_t k = 0; k < d.K(); ++k)
      if (d.w[k] > 0.0)
        p.entries_.push_back({d.w[k] * inv, d.atoms[k]});
  return p;
}

MixturePredictive MixturePredictive::from_dp(
    const DPTrace& trace, std::span<const ComponentForecast> components) {
  if (trace.draws.empty())
    throw std::invalid_argument("MixturePredictive: trace has no draws");
  MixturePredictive p;
  p.components_.assign(components.begin(), components.end());
  p.draw_count_ = trace.draws.size();
  const double inv = 1.0 / static_cast<double>(trace.draws.size());
  for (const DPSnapshot& snap : trace.draws) {
    double total = 0.0;
    for (double w : snap.weights) total += w;
    for (std::size_t k = 0; k < snap.weights.size(); ++k)
      if (snap.weights[k] > 0.0)
        p.entries_.push_back({snap.weights[k] / total * inv, snap.atoms[k]});
  }
  return p;
}

MixturePredictive MixturePredictive::plugin_from_finite(
    const FiniteTrace& trace, std::span<const ComponentForecast> components) {
  if (trace.draws.empty())
    throw std::invalid_argument("MixturePredictive: trace has no draws");
  const std::size_t K = trace.K;
  const std::size_t M = trace.M;
  const double inv = 1.0 / static_cast<double>(trace.draws.size());
  std::vector<double> w(K, 0.0), mu(K, 0.0), nu(K, 0.0);
  std::vector<std::vector<double>> om(K, std::vector<double>(M, 0.0));
  for (const FiniteParams& d : trace.draws)
    for (std::size_t k = 0; k < K; ++k) {
      w[k] += d.w[k] * inv;
      mu[k] += d.atoms[k].cal.mu * inv;
      nu[k] += d.atoms[k].cal.nu * inv;
      for (std::size_t m = 0; m < M; ++m)
        om[k][m] += d.atoms[k].omega[m] * inv;
    }
  // Renormalize the averaged simplices against accumulated rounding.
  double wsum = 0.0;
  for (double v : w) wsum += v;
  MixturePredictive p;
  p.components_.assign(components.begin(), components.end());
  p.draw_count_ = 1;
  for (std::size_t k = 0; k < K; ++k) {
    double osum = 0.0;
    for (double v : om[k]) osum += v;
    for (double& v : om[k]) v /= osum;
    p.entries_.push_back({w[k] / wsum,
                          CalibrationAtom(BetaMeanPrecision(mu[k], nu[k]),
                                          PoolWeights(om[k]))});
  }
  return p;
}

MixturePredictive MixturePredictive::from_pool(
    const PoolWeights& w, std::span<const ComponentForecast> components) {
  MixturePredictive p;
  p.components_.assign(components.begin(), components.end());
  p.draw_count_ = 1;
  p.entries_.push_back({1.0, CalibrationAtom(BetaMeanPrecision(0.5, 2.0), w)});
  return p;
}

MixturePredictive MixturePredictive::from_draws(
    std::span<const DrawParams> draws,
    std::span<const ComponentForecast> components) {
  if (draws.empty())
    throw std::invalid_argument("MixturePredictive: no draws");
  MixturePredictive p;
  p.components_.assign(components.begin(), components.end());
  p.draw_count_ = draws.size();
  const double inv = 1.0 / static_cast<double>(draws.size());
  for (const DrawParams& d : draws)
    for (std::size_t k = 0; k < d.w.size(); ++k)
      if (d.w[k] > 0.0) p.entries_.push_back({d.w[k] * inv, d.atoms[k]});
  return p;
}

double MixturePredictive::cdf(double y) const {
  double out = 0.0;
  mixture_curve_serial(entries_, components_, std::span<const double>(&y, 1),
                       std::span<double>(&out, 1), {});
  return out;
}

double MixturePredictive::pdf(double y) const {
  double c = 0.0, d = 0.0;
  mixture_curve_serial(entries_, components_, std::span<const double>(&y, 1),
                       std::span<double>(&c, 1), std::span<double>(&d, 1));
  return d;
}

void MixturePredictive::cdf_grid(std::span<const double> ys,
                                 std::span<double> out) const {
  mixture_curve(entries_, components_, ys, out, {});
}

double MixturePredictive::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0))
    throw std::domain_error("MixturePredictive::quantile: q must lie in (0,1)");
  const double M = static_cast<double>(components_.size());
  double lo = components_[0].quantile(std::min(q / M, 0.5));
  double hi = components_[0].quantile(std::max(1.0 - (1.0 - q) / M, 0.5));
  for (const ComponentForecast& c : components_) {
    lo = std::min(lo, c.quantile(std::min(q / M, 0.5)));
    hi = std::max(hi, c.quantile(std::max(1.0 - (1.0 - q) / M, 0.5)));
  }
  double step = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && cdf(lo) > q; ++i) {
    lo -= step;
    step *= 2.0;
  }
  step = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && cdf(hi) < q; ++i) {
    hi += step;
    step *= 2.0;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = cdf(mid);
    if (std::fabs(fm - q) <= 1e-10 || hi - lo <= 1e-13 * (1.0 + std::fabs(mid)))
      return mid;
    (fm < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<DrawParams> eval_draws_from(const FiniteTrace& trace) {
  std::vector<DrawParams> out;
  out.reserve(trace.draws.size());
  for (const FiniteParams& d : trace.draws) out.push_back({d.w, d.atoms});
  return out;
}

std::vector<DrawParams> eval_draws_from(const DPTrace& trace) {
  std::vector<DrawParams> out;
  out.reserve(trace.draws.size());
  for (const DPSnapshot& snap : trace.draws) {
    DrawParams d;
    double total = 0.0;
    for (double w : snap.weights) total += w;
    d.w.reserve(snap.weights.size());
    for (double w : snap.weights) d.w.push_back(w / total);
    d.atoms = snap.atoms;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DrawParams> thin_draws(std::vector<DrawParams> draws,
                                   std::size_t target) {
  if (target == 0 || draws.size() <= target) return draws;
  std::vector<DrawParams> out;
  out.reserve(target);
  const double stride = static_cast<double>(draws.size()) / static_cast<double>(target);
  for (std::size_t i = 0; i < target; ++i)
    out.push_back(std::move(draws[static_cast<std::size_t>(i * stride)]));
  return out;
}

double predictive_cdf(const FiniteTrace& trace,
                      std::span<const ComponentForecast> components, double y) {
  return MixturePredictive::from_finite(trace, components).cdf(y);
}

double predictive_cdf(const DPTrace& trace,
                      std::span<const ComponentForecast> components, double y) {
  return MixturePredictive::from_dp(trace, components).cdf(y);
}

std::vector<double> compute_pits(std::span<const DrawParams> draws,
                                 const ForecastSeries& series) {
  if (draws.empty())
    throw std::invalid_argument("compute_pits: no draws");
  const SeriesEval se = SeriesEval::from(series);
  const std::size_t I = draws.size();
  std::vector<double> pit(I * se.T), logpdf(I * se.T);
  eval_draw_matrices(draws, se, pit, logpdf);
  std::vector<double> out(se.T, 0.0);
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t t = 0; t < se.T; ++t) out[t] += pit[i * se.T + t];
  const double inv = 1.0 / static_cast<double>(I);
  for (double& v : out) v *= inv;
  return out;
}

namespace {

// Empirical cdf of each draw's PIT vector at the grid points, then pointwise
// quantiles across draws.
PitBand band_from_matrix(const std::vector<double>& pit, std::size_t I,
                         std::size_t T, std::span<const double> grid,
                         double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("pit_band: level must lie in (0,1)");
  std::vector<double> ecdf(I * grid.size());
  std::vector<double> row(T);
  for (std::size_t i = 0; i < I; ++i) {
    std::copy(pit.begin() + static_cast<long>(i * T),
              pit.begin() + static_cast<long>((i + 1) * T), row.begin());
    std::sort(row.begin(), row.end());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto it = std::upper_bound(row.begin(), row.end(), grid[g]);
      ecdf[i * grid.size() + g] =
          static_cast<double>(it - row.begin()) / static_cast<double>(T);
    }
  }

  PitBand band;
  band.grid.assign(grid.begin(), grid.end());
  band.lo.resize(grid.size());
  band.hi.resize(grid.size());
  std::vector<double> col(I);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < I; ++i) col[i] = ecdf[i * grid.size() + g];
    std::sort(col.begin(), col.end());
    band.lo[g] = sorted_quantile(col, 0.5 * (1.0 - level));
    band.hi[g] = sorted_quantile(col, 0.5 * (1.0 + level));
  }
  return band;
}

}  // namespace

PitBand pit_band(std::span<const DrawParams> draws, const ForecastSeries& series,
                 std::span<const double> grid, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("pit_band: level must lie in (0,1)");
  if (draws.empty())
    throw std::invalid_argument("pit_band: no draws");
  const SeriesEval se = SeriesEval::from(series);
  const std::size_t I = draws.size();
  std::vector<double> pit(I * se.T), logpdf(I * se.T);
  eval_draw_matrices(draws, se, pit, logpdf);
  return band_from_matrix(pit, I, se.T, grid, level);
}

double avg_log_score(std::span<const DrawParams> draws,
                     const ForecastSeries& series, long* clamp_count) {
  if (draws.empty())
    throw std::invalid_argument("avg_log_score: no draws");
  const SeriesEval se = SeriesEval::from(series);
  const std::size_t I = draws.size();
  std::vector<double> pit(I * se.T), logpdf(I * se.T);
  eval_draw_matrices(draws, se, pit, logpdf);
  const double log_inv = -std::log(static_cast<double>(I));
  double acc = 0.0;
  long clamps = 0;
  for (std::size_t t = 0; t < se.T; ++t) {
    double m = kNegInf;
    for (std::size_t i = 0; i < I; ++i) m = std::max(m, logpdf[i * se.T + t]);
    double ls;
    if (m == kNegInf) {
      ls = kLogClamp;
      ++clamps;
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < I; ++i)
        s += std::exp(logpdf[i * se.T + t] - m);
      ls = m + std::log(s) + log_inv;
      if (ls < kLogClamp) {
        ls = kLogClamp;
        ++clamps;
      }
    }
    acc += ls;
  }
  if (clamp_count != nullptr) *clamp_count = clamps;
  return acc / static_cast<double>(se.T);
}

double crps(const MixturePredictive& predictive, double y) {
  const double qlo = predictive.quantile(kCrpsTail);
  const double qhi = predictive.quantile(1.0 - kCrpsTail);
  const double a = std::min(qlo, y);
  const double b = std::max(qhi, y);

  // Split at y so each Simpson run integrates a smooth piece; node counts are
  // proportional to the side lengths with an even panel count per side.
  const double len = b - a;
  std::size_t n_left = 0, n_right = 0;  // panels per side
  if (len > 0.0) {
    const std::size_t panels = kCrpsNodes - 1;
    n_left = static_cast<std::size_t>(std::lround(
        static_cast<double>(panels) * (y - a) / len));
    n_left = std::min(panels, n_left);
    n_left += n_left % 2;
    if (y > a && n_left == 0) n_left = 2;
    n_right = panels - n_left;
    n_right -= n_right % 2;
    if (y < b && n_right == 0) n_right = 2;
  }

  std::vector<double> nodes;
  nodes.reserve(n_left + n_right + 2);
  for (std::size_t i = 0; i <= n_left && y > a; ++i)
    nodes.push_back(a + (y - a) * static_cast<double>(i) / static_cast<double>(n_left));
  const std::size_t right_begin = nodes.size();
  for (std::size_t i = 0; i <= n_right && b > y; ++i)
    nodes.push_back(y + (b - y) * static_cast<double>(i) / static_cast<double>(n_right));

  std::vector<double> F(nodes.size());
  predictive.cdf_grid(nodes, F);

  double total = 0.0;
  if (y > a) {
    const double h = (y - a) / static_cast<double>(n_left);
    double s = 0.0;
    for (std::size_t i = 0; i <= n_left; ++i) {
      const double v = F[i] * F[i];
      const double c = (i == 0 || i == n_left) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      s += c * v;
    }
    total += s * h / 3.0;
  }
  if (b > y) {
    const double h = (b - y) / static_cast<double>(n_right);
    double s = 0.0;
    for (std::size_t i = 0; i <= n_right; ++i) {
      const double g = 1.0 - F[right_begin + i];
      const double c = (i == 0 || i == n_right) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      s += c * g * g;
    }
    total += s * h / 3.0;
  }

  // Tail pieces over (-inf, a] and [b, inf) via z = a - s/(1-s) and
  // z = b + s/(1-s).  Extreme calibration draws put kernel mass far beyond any
  // fixed bracket, so the tails are integrated rather than modelled; the
  // integrand vanishes at s = 1 whenever the square-integral converges.
  const std::size_t n_tail = 128;
  std::vector<double> zs(2 * n_tail), Fz(2 * n_tail);
  for (std::size_t i = 0; i < n_tail; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n_tail);
    const double r = 1.0 / (1.0 - s);
    zs[i] = a - s * r;
    zs[n_tail + i] = b + s * r;
  }
  predictive.cdf_grid(zs, Fz);
  double lower = 0.0, upper = 0.0;
  for (std::size_t i = 0; i < n_tail; ++i) {
    const double r = 1.0 / (1.0 - static_cast<double>(i) / static_cast<double>(n_tail));
    const double c = (i == 0) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    lower += c * Fz[i] * Fz[i] * r * r;
    const double S = 1.0 - Fz[n_tail + i];
    upper += c * S * S * r * r;
  }
  const double h_tail = 1.0 / (3.0 * static_cast<double>(n_tail));
  total += (lower + upper) * h_tail;
  return total;
}

KsResult ks_uniformity(std::span<const double> pits) {
  if (pits.empty())
    throw std::invalid_argument("ks_uniformity: empty PIT vector");
  std::vector<double> sorted(pits.begin(), pits.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double up = static_cast<double>(i + 1) / n - sorted[i];
    const double down = sorted[i] - static_cast<double>(i) / n;
    d = std::max({d, up, down});
  }
  KsResult r;
  r.statistic = d;
  r.critical = 1.358 / std::sqrt(n);
  r.pass = d < r.critical;
  return r;
}

std::vector<PoolWeights> recursive_logscore_weights(const ForecastSeries& series,
                                                    long* degenerate_steps) {
  const SeriesEval se = SeriesEval::from(series);
  std::vector<PoolWeights> out;
  out.reserve(se.T);
  std::vector<double> cum(se.M, 0.0);
  long degenerate = 0;
  for (std::size_t t = 0; t < se.T; ++t) {
    const double m = *std::max_element(cum.begin(), cum.end());
    std::vector<double> w(se.M);
    if (m == kNegInf) {
      w.assign(se.M, 1.0 / static_cast<double>(se.M));
    } else {
      double total = 0.0;
      for (std::size_t j = 0; j < se.M; ++j) {
        w[j] = std::exp(cum[j] - m);
        total += w[j];
      }
      for (double& v : w) v /= total;
    }
    out.emplace_back(std::move(w));

    const double* f = se.pdf_row(t);
    double fmax = 0.0;
    for (std::size_t j = 0; j < se.M; ++j) fmax = std::max(fmax, f[j]);
    if (fmax <= 0.0) {
      ++degenerate;  // no component explains y_t; carry the weights forward
      continue;
    }
    for (std::size_t j = 0; j < se.M; ++j)
      cum[j] += f[j] > 0.0 ? std::log(f[j]) : kNegInf;
  }
  if (degenerate_steps != nullptr) *degenerate_steps = degenerate;
  return out;
}

namespace {

bool same_components(std::span<const ComponentForecast> a,
                     std::span<const ComponentForecast> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t m = 0; m < a.size(); ++m) {
    const ComponentForecast &x = a[m], &y = b[m];
    if (x.family != y.family || x.location != y.location ||
        x.scale != y.scale || x.shape != y.shape || x.dof != y.dof ||
        x.grid_x != y.grid_x || x.grid_cdf != y.grid_cdf)
      return false;
  }
  return true;
}

}  // namespace

EvalReport evaluate_draws(std::span<const DrawParams> draws,
                          const ForecastSeries& series,
                          const EvalOptions& opts) {
  if (draws.empty())
    throw std::invalid_argument("evaluate_draws: no draws");
  const SeriesEval se = SeriesEval::from(series);
  const std::size_t I = draws.size();
  std::vector<double> pit(I * se.T), logpdf(I * se.T);
  eval_draw_matrices(draws, se, pit, logpdf);

  EvalReport report;
  report.pits.assign(se.T, 0.0);
  report.log_scores.resize(se.T);
  const double inv = 1.0 / static_cast<double>(I);
  const double log_inv = -std::log(static_cast<double>(I));
  double acc = 0.0;
  for (std::size_t t = 0; t < se.T; ++t) {
    double m = kNegInf;
    for (std::size_t i = 0; i < I; ++i) {
      report.pits[t] += pit[i * se.T + t];
      m = std::max(m, logpdf[i * se.T + t]);
    }
    report.pits[t] *= inv;
    double ls;
    if (m == kNegInf) {
      ls = kLogClamp;
      ++report.clamp_count;
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < I; ++i)
        s += std::exp(logpdf[i * se.T + t] - m);
      ls = m + std::log(s) + log_inv;
      if (ls < kLogClamp) {
        ls = kLogClamp;
        ++report.clamp_count;
      }
    }
    report.log_scores[t] = ls;
    acc += ls;
  }
  report.avls = acc / static_cast<double>(se.T);
  report.ks = ks_uniformity(report.pits);

  if (opts.band) {
    std::vector<double> grid(opts.band_grid);
    for (std::size_t g = 0; g < grid.size(); ++g)
      grid[g] = static_cast<double>(g) / static_cast<double>(grid.size() - 1);
    report.band = band_from_matrix(pit, I, se.T, grid, opts.band_level);
  }

  if (opts.with_crps) {
    const std::vector<DrawParams> thinned =
        thin_draws({draws.begin(), draws.end()}, opts.crps_draws);
    report.crps_values.resize(se.T);
    std::optional<MixturePredictive> pred;
    double total = 0.0;
    for (std::size_t t = 0; t < se.T; ++t) {
      const auto& comps = series.steps[t].components;
      if (!pred.has_value() ||
          !same_components(pred->components(), comps))
        pred = MixturePredictive::from_draws(thinned, comps);
      report.crps_values[t] = crps(*pred, series.steps[t].y);
      total += report.crps_values[t];
    }
    report.avcrps = total / static_cast<double>(se.T);
  }
  return report;
}

}  // namespace bmcal
