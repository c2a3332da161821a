#pragma once

#include <span>
#include <vector>

#include "bmcal/model.hpp"
#include "bmcal/pool.hpp"
#include "bmcal/rng.hpp"
#include "bmcal/sampler_finite.hpp"

namespace bmcal {

// One stored sweep of the slice sampler, truncated at the coverage count N*.
struct DPSnapshot {
  std::vector<double> weights;  // stick-breaking weights, length N*
  std::vector<CalibrationAtom> atoms;
  std::vector<int> alloc;  // 0-based cluster of each observation
  double psi = 1.0;
  int n_occupied = 0;
};

struct DPTrace {
  std::size_t M = 0;
  Hyperparams hyper;
  McmcConfig config;
  std::vector<DPSnapshot> draws;
  std::vector<int> cluster_counts;  // occupied clusters, every sweep
  double acc_mu_nu = 0.0;
  double acc_omega = 0.0;
  long numeric_warnings = 0;
};

// Full sampler state plus cached kernel columns.  Exposed so the slice steps
// can be unit-tested one at a time.
class DPSampler {
 public:
  DPSampler(const ForecastSeries& series, const Hyperparams& hyper,
            const McmcConfig& config);

  // Steps in sweep order.
  void update_atoms(Rng& rng);
  void update_sticks_slices(Rng& rng);  // occupied sticks, slices, extension
  void update_allocations(Rng& rng);
  void update_psi(Rng& rng);  // no-op under fixed psi

  void sweep(Rng& rng);
  DPSnapshot snapshot() const;
  void check_state() const;  // throws std::logic_error on violated invariants

  int occupied_count() const;
  std::size_t stick_count() const { return sticks_.size(); }
  double psi() const { return psi_; }
  const std::vector<int>& alloc() const { return alloc_; }
  const std::vector<double>& slices() const { return slices_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<CalibrationAtom>& atoms() const { return atoms_; }
  const SeriesEval& series_eval() const { return se_; }

  void seed_state(Rng& rng);  // prior initialization
  long accept_mu_nu = 0, propose_mu_nu = 0;
  long accept_omega = 0, propose_omega = 0;
  long numeric_warnings = 0;

 private:
  void append_component(Rng& rng);  // stick from Be(1,psi), atom from G0
  void recompute_weights();

  SeriesEval se_;
  Hyperparams hyper_;
  McmcConfig config_;
  std::vector<double> sticks_;
  std::vector<double> weights_;
  std::vector<CalibrationAtom> atoms_;
  std::vector<detail::ClusterCache> caches_;
  std::vector<double> slices_;
  std::vector<int> alloc_;
  double psi_ = 1.0;
  double stick_remainder_ = 1.0;  // prod (1 - v_l) over stored sticks
};

DPTrace run_slice_sampler(const ForecastSeries& series, const Hyperparams& hyper,
                          const McmcConfig& config);

// Escobar-West auxiliary update of the concentration given the occupied
// cluster count; exposed for unit tests.
double psi_gibbs_update(double psi, int occupied, std::size_t T, double c,
                        double d, Rng& rng);

// One draw from the predictive of a stored sweep: pick a stick by a uniform,
// extending the stick-breaking representation from the base measure when the
// uniform falls past the stored mass, then push a beta draw through the
// inverse pool cdf.
double sample_predictive_dp(const DPSnapshot& snap, const Hyperparams& hyper,
                            std::span<const ComponentForecast> components,
                            Rng& rng);

}  // namespace bmcal
