#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "tbslab/grid.hpp"
#include "tbslab/rng.hpp"

namespace tbslab {

enum class SamplingMode { random, ell_tbs, st_tbs, hybrid };

SamplingMode parse_sampling_mode(std::string_view name);
std::string_view to_string(SamplingMode mode);

struct SamplerConfig {
  SamplingMode mode = SamplingMode::st_tbs;
  std::size_t m = 50;
  std::size_t ell = 5;          // cells of accumulated path, ell_tbs only
  double p_persist = 0.8;
  double p_trig = 0.05;         // st_tbs and the trajectory part of hybrid
  double alpha = 0.5;           // hybrid only
  std::size_t step_budget = 0;  // 0 selects 500 * m

  std::size_t effective_step_budget() const noexcept {
    return step_budget ? step_budget : 500 * m;
  }

  static SamplerConfig random(std::size_t m);
  static SamplerConfig st_tbs(std::size_t m, double p_persist = 0.8, double p_trig = 0.05);
  static SamplerConfig ell_tbs(std::size_t m, std::size_t ell, double p_persist = 0.8);
  static SamplerConfig hybrid(std::size_t m, double alpha, double p_persist = 0.8,
                              double p_trig = 0.05);
};

/// Throws ValidationError for out-of-range probabilities or counts and
/// CapacityError when m exceeds the mask's free cells.
void validate(const SamplerConfig& config, const EnvironmentMask& mask);

struct SamplingSet {
  GridSpec grid;
  SamplingMode mode = SamplingMode::random;
  /// Sampled cells in acquisition order; distinct and free.
  std::vector<std::size_t> indices;
  /// Every cell the walker occupied, in visit order, starting cell first.
  /// Empty for random sampling.
  std::vector<std::size_t> trajectory;
  /// For the first trigger_steps.size() entries of `indices`: the trajectory
  /// position at which that sample was taken.
  std::vector<std::size_t> trigger_steps;
};

/// m distinct free cells drawn uniformly without replacement.
SamplingSet random_sample(const EnvironmentMask& mask, std::size_t m, Rng& rng);

/// Persistent random walk with fixed-interval (ell_tbs) or stochastic
/// (st_tbs) triggering. Throws StallError when the step budget runs out.
SamplingSet trajectory_sample(const EnvironmentMask& mask, const SamplerConfig& config,
                              Rng& rng);

/// round(alpha m) samples from an st_tbs walk, the rest uniformly from the
/// remaining free cells. alpha = 0 and alpha = 1 consume exactly the random
/// numbers of random_sample and trajectory_sample respectively.
SamplingSet hybrid_sample(const EnvironmentMask& mask, const SamplerConfig& config,
                          Rng& rng);

/// Dispatches on config.mode.
SamplingSet draw_sampling_set(const EnvironmentMask& mask, const SamplerConfig& config,
                              Rng& rng);

/// y = P_S x + n with n ~ N(0, noise_var I).
struct Observation {
  std::vector<double> values;
  double noise_var = 0.0;
  SamplingSet source;
};

Observation observe(const FieldSample& field, const SamplingSet& s, double noise_var,
                    Rng& rng);

}  // namespace tbslab
