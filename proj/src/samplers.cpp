#include "tbslab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "tbslab/errors.hpp"

namespace tbslab {

SamplingMode parse_sampling_mode(std::string_view name) {
  if (name == "random") return SamplingMode::random;
  if (name == "ell_tbs") return SamplingMode::ell_tbs;
  if (name == "st_tbs") return SamplingMode::st_tbs;
  if (name == "hybrid") return SamplingMode::hybrid;
  throw ValidationError("unknown sampling mode '" + std::string(name) + "'");
}

std::string_view to_string(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::random: return "random";
    case SamplingMode::ell_tbs: return "ell_tbs";
    case SamplingMode::st_tbs: return "st_tbs";
    case SamplingMode::hybrid: return "hybrid";
  }
  return "unknown";
}

SamplerConfig SamplerConfig::random(std::size_t m) {
  SamplerConfig c;
  c.mode = SamplingMode::random;
  c.m = m;
  return c;
}

SamplerConfig SamplerConfig::st_tbs(std::size_t m, double p_persist, double p_trig) {
  SamplerConfig c;
  c.mode = SamplingMode::st_tbs;
  c.m = m;
  c.p_persist = p_persist;
  c.p_trig = p_trig;
  return c;
}

SamplerConfig SamplerConfig::ell_tbs(std::size_t m, std::size_t ell, double p_persist) {
  SamplerConfig c;
  c.mode = SamplingMode::ell_tbs;
  c.m = m;
  c.ell = ell;
  c.p_persist = p_persist;
  return c;
}

SamplerConfig SamplerConfig::hybrid(std::size_t m, double alpha, double p_persist,
                                    double p_trig) {
  SamplerConfig c;
  c.mode = SamplingMode::hybrid;
  c.m = m;
  c.alpha = alpha;
  c.p_persist = p_persist;
  c.p_trig = p_trig;
  return c;
}

void validate(const SamplerConfig& config, const EnvironmentMask& mask) {
  if (config.m == 0) throw ValidationError("sampler.m must be positive");
  if (config.m > mask.free_cells().size()) {
    throw CapacityError("requested " + std::to_string(config.m) + " samples but the mask has " +
                        std::to_string(mask.free_cells().size()) + " free cells");
  }
  if (!(config.p_persist >= 0.0 && config.p_persist <= 1.0)) {
    throw ValidationError("sampler.p_persist must be in [0, 1]");
  }
  const bool walks = config.mode != SamplingMode::random;
  if (config.mode == SamplingMode::ell_tbs && config.ell == 0) {
    throw ValidationError("sampler.ell must be a positive integer");
  }
  if ((config.mode == SamplingMode::st_tbs || config.mode == SamplingMode::hybrid) &&
      !(config.p_trig > 0.0 && config.p_trig <= 1.0)) {
    throw ValidationError("sampler.p_trig must be in (0, 1]");
  }
  if (config.mode == SamplingMode::hybrid && !(config.alpha >= 0.0 && config.alpha <= 1.0)) {
    throw ValidationError("sampler.alpha must be in [0, 1]");
  }
  if (walks && config.effective_step_budget() == 0) {
    throw ValidationError("sampler.step_budget must be positive");
  }
}

namespace {

// Uniform draw of k cells from `candidates` without replacement (partial
// Fisher-Yates); order of the result is the draw order.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> candidates,
                                                  std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }
  candidates.resize(k);
  return candidates;
}

enum class Heading { up, down, left, right };

std::optional<std::size_t> step(const GridSpec& g, std::size_t cell, Heading h) {
  const auto c = g.coords(cell);
  switch (h) {
    case Heading::up:
      if (c.row == 0) return std::nullopt;
      return cell - g.width();
    case Heading::down:
      if (c.row + 1 == g.height()) return std::nullopt;
      return cell + g.width();
    case Heading::left:
      if (c.col == 0) return std::nullopt;
      return cell - 1;
    case Heading::right:
      if (c.col + 1 == g.width()) return std::nullopt;
      return cell + 1;
  }
  return std::nullopt;
}

}  // namespace

SamplingSet random_sample(const EnvironmentMask& mask, std::size_t m, Rng& rng) {
  validate(SamplerConfig::random(m), mask);
  const auto free = mask.free_cells();
  SamplingSet s{mask.grid(), SamplingMode::random, {}, {}, {}};
  s.indices = draw_without_replacement({free.begin(), free.end()}, m, rng);
  return s;
}

SamplingSet trajectory_sample(const EnvironmentMask& mask, const SamplerConfig& config,
                              Rng& rng) {
  if (config.mode != SamplingMode::ell_tbs && config.mode != SamplingMode::st_tbs) {
    throw ValidationError("trajectory_sample needs mode ell_tbs or st_tbs");
  }
  validate(config, mask);
  const auto& g = mask.grid();
  const auto free = mask.free_cells();
  const bool stochastic = config.mode == SamplingMode::st_tbs;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> any_heading(0, 3);

  SamplingSet s{g, config.mode, {}, {}, {}};
  std::vector<std::uint8_t> taken(g.cell_count(), 0);
  std::size_t current =
      free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
  s.trajectory.push_back(current);
  constexpr int kNoHeading = -1;
  int previous = kNoHeading;
  std::size_t accumulated = 0;

  const std::size_t budget = config.effective_step_budget();
  for (std::size_t steps = 0; s.indices.size() < config.m; ++steps) {
    if (steps == budget) {
      throw StallError("walker stalled after " + std::to_string(budget) + " steps with " +
                           std::to_string(s.indices.size()) + " of " +
                           std::to_string(config.m) + " samples",
                       s.indices.size());
    }
    const bool persist = unit(rng) < config.p_persist && previous != kNoHeading;
    const auto heading = static_cast<Heading>(persist ? previous : any_heading(rng));
    const auto next = step(g, current, heading);
    if (!next || !mask.is_free(*next)) {
      previous = kNoHeading;
      continue;
    }
    current = *next;
    previous = static_cast<int>(heading);
    ++accumulated;
    s.trajectory.push_back(current);

    bool add = false;
    if (stochastic) {
      add = unit(rng) < config.p_trig && !taken[current];
    } else if (accumulated >= config.ell && !taken[current]) {
      add = true;
      accumulated = 0;
    }
    if (add) {
      taken[current] = 1;
      s.indices.push_back(current);
      s.trigger_steps.push_back(s.trajectory.size() - 1);
    }
  }
  return s;
}

SamplingSet hybrid_sample(const EnvironmentMask& mask, const SamplerConfig& config,
                          Rng& rng) {
  if (config.mode != SamplingMode::hybrid) {
    throw ValidationError("hybrid_sample needs mode hybrid");
  }
  validate(config, mask);
  const auto on_path =
      static_cast<std::size_t>(std::llround(config.alpha * static_cast<double>(config.m)));

  SamplingSet s{mask.grid(), SamplingMode::hybrid, {}, {}, {}};
  if (on_path > 0) {
    SamplerConfig walk = config;
    walk.mode = SamplingMode::st_tbs;
    walk.m = on_path;
    walk.step_budget = config.effective_step_budget();
    s = trajectory_sample(mask, walk, rng);
    s.mode = SamplingMode::hybrid;
  }
  const std::size_t rest = config.m - on_path;
  if (rest > 0) {
    std::vector<std::uint8_t> taken(mask.grid().cell_count(), 0);
    for (const auto i : s.indices) taken[i] = 1;
    std::vector<std::size_t> candidates;
    candidates.reserve(mask.free_cells().size());
    for (const auto i : mask.free_cells()) {
      if (!taken[i]) candidates.push_back(i);
    }
    const auto extra = draw_without_replacement(std::move(candidates), rest, rng);
    s.indices.insert(s.indices.end(), extra.begin(), extra.end());
  }
  return s;
}

SamplingSet draw_sampling_set(const EnvironmentMask& mask, const SamplerConfig& config,
                              Rng& rng) {
  switch (config.mode) {
    case SamplingMode::random:
      return random_sample(mask, config.m, rng);
    case SamplingMode::ell_tbs:
    case SamplingMode::st_tbs:
      return trajectory_sample(mask, config, rng);
    case SamplingMode::hybrid:
      return hybrid_sample(mask, config, rng);
  }
  throw ValidationError("unknown sampling mode");
}

Observation observe(const FieldSample& field, const SamplingSet& s, double noise_var,
                    Rng& rng) {
  if (!(field.grid == s.grid)) {
    throw ValidationError("observe: sampling set and field live on different grids");
  }
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw ValidationError("observe: noise variance must be >= 0");
  }
  Observation obs{{}, noise_var, s};
  obs.values.reserve(s.indices.size());
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
  for (const auto i : s.indices) {
    if (i >= field.values.size()) throw ValidationError("observe: sample index out of range");
    obs.values.push_back(noise_var > 0.0 ? field.values[i] + noise(rng) : field.values[i]);
  }
  return obs;
}

}  // namespace tbslab
