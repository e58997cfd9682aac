#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbslab/gaussian_field.hpp"
#include "tbslab/grid.hpp"
#include "tbslab/metrics.hpp"
#include "tbslab/parallel.hpp"
#include "tbslab/samplers.hpp"

namespace tbslab {

enum class EstimatorKind { gp_posterior, idw, nearest, fitted_gp };

EstimatorKind parse_estimator_kind(std::string_view name);
std::string_view to_string(EstimatorKind kind);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::gp_posterior;
  Kernel kernel;           // gp kinds
  double noise_var = 0.0;  // gp kinds
  double power = 2.0;      // idw
  std::string label;       // reported name; defaults to the kind

  std::string name() const { return label.empty() ? std::string(to_string(kind)) : label; }

  static EstimatorSpec gp(const Kernel& kernel, double noise_var, std::string label = {});
  static EstimatorSpec idw(double power, std::string label = {});
  static EstimatorSpec nearest(std::string label = {});
};

void validate(const EstimatorSpec& spec);

struct GpPosterior {
  FieldSample estimate;
  /// Posterior variance per cell; empty when not requested.
  std::vector<double> variance;
  /// tr(K) - tr(K P^T (P K P^T + s2 I)^-1 P K), the Bayes MMSE for this set.
  double posterior_trace = 0.0;
};

/// Posterior mean K P^T (P K P^T + s2 I)^-1 y and, on request, per-cell
/// posterior variances. An empty observation yields the prior.
GpPosterior gp_posterior(const Kernel& kernel, double noise_var, const Observation& obs,
                         const GridSpec& grid, bool with_variance = true);

/// Inverse-distance weighting; a sampled cell returns its own observation.
FieldSample idw_reconstruct(const Observation& obs, double power, const GridSpec& grid);

/// Value of the nearest sample; ties go to the smaller cell index.
FieldSample nearest_reconstruct(const Observation& obs, const GridSpec& grid);

FieldSample reconstruct(const EstimatorSpec& spec, const Observation& obs,
                        const GridSpec& grid);

/// Ground-truth model shared by every Monte Carlo routine: the mask, the
/// true kernel and noise, and a cached field simulator.
struct Testbed {
  EnvironmentMask mask;
  Kernel kernel;
  double noise_var = 0.01;
  std::shared_ptr<const FieldSimulator> simulator;
  MetricConfig metrics;
  Execution exec = Execution::parallel;

  static Testbed make(EnvironmentMask mask, const Kernel& kernel, double noise_var,
                      std::size_t max_cells = FieldSimulator::kDefaultMaxCells,
                      MetricConfig metrics = {});
  const GridSpec& grid() const noexcept { return mask.grid(); }
};

/// One (field, sampling set, noise) draw. Field and noise come from streams
/// keyed by (seed, trial) only, so different sampling modes and estimators
/// see identical fields.
struct TrialDraw {
  std::size_t trial = 0;
  FieldSample truth;
  Observation obs;
};

/// Returns nullopt when the sampler stalls.
std::optional<TrialDraw> draw_trial(const Testbed& bed, const SamplerConfig& mode,
                                    std::uint64_t seed, std::size_t trial);

struct RiskReport {
  std::string estimator;
  std::string test_mode;
  std::size_t trials = 0;  // completed (non-stalled) trials
  std::size_t stalls = 0;
  double mean_mse = 0.0;   // per free cell
  double stderr_mse = 0.0;
  double mean_rmse = 0.0;  // mean over trials of sqrt(per-trial MSE)
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;  // NaN when the grid is smaller than the SSIM window
  /// Mean of posterior_trace restricted to free cells / |free|; gp_posterior only, else NaN.
  double mean_posterior_mse = 0.0;
  std::vector<std::size_t> trial_ids;
  std::vector<double> trial_mse;
};

using Reconstructor = std::function<FieldSample(const TrialDraw&)>;

/// Evaluates several estimators on the same n_trials draws.
std::vector<RiskReport> evaluate_risks(const Testbed& bed,
                                       std::span<const EstimatorSpec> specs,
                                       const SamplerConfig& test_mode, std::size_t n_trials,
                                       std::uint64_t seed);

RiskReport estimate_risk(const Testbed& bed, const EstimatorSpec& spec,
                         const SamplerConfig& test_mode, std::size_t n_trials,
                         std::uint64_t seed);

/// Same Monte Carlo loop with an arbitrary reconstruction (test hook).
RiskReport estimate_risk(const Testbed& bed, const Reconstructor& fn, std::string label,
                         const SamplerConfig& test_mode, std::size_t n_trials,
                         std::uint64_t seed);

/// Candidate grids for fitting. Length scales in meters.
struct SearchGrid {
  std::vector<double> length_scales;
  std::vector<double> noise_vars;
};

struct CandidateRisk {
  double length_scale = 0.0;
  double noise_var = 0.0;
  double risk = 0.0;
};

struct FittedParams {
  Kernel kernel;
  double noise_var = 0.0;
  SamplingMode train_mode = SamplingMode::random;
  double train_risk = 0.0;
  std::size_t stalls = 0;
  /// Empirical risk of every candidate on the shared training draws,
  /// ordered by (length_scale, noise_var).
  std::vector<CandidateRisk> candidates;

  EstimatorSpec as_estimator(std::string label) const;
};

/// Grid search of (length_scale, noise_var) for a Gaussian posterior of the
/// given family, minimizing per-free-cell MSE averaged over n_train draws
/// from train_mode. All candidates share the draws. Ties go to the smaller
/// length scale, then the smaller noise variance.
FittedParams fit_estimator(const Testbed& bed, KernelFamily family,
                           const SamplerConfig& train_mode, std::size_t n_train,
                           const SearchGrid& search, std::uint64_t seed);

}  // namespace tbslab
