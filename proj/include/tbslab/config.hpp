#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tbslab/estimators.hpp"
#include "tbslab/gaussian_field.hpp"
#include "tbslab/grid.hpp"
#include "tbslab/grid_io.hpp"
#include "tbslab/metrics.hpp"
#include "tbslab/samplers.hpp"

namespace tbslab {

enum class MaskSource { free, generated, file };

/// Flat experiment configuration. Lengths (kernel.lambda, diag.r0,
/// fit.lambda_grid, sampler.ell) are in cells; they are scaled by
/// grid.cell_size where meters are needed.
struct ExperimentConfig {
  std::size_t grid_width = 64;
  std::size_t grid_height = 64;
  double cell_size = 1.0;

  MaskSource mask_source = MaskSource::free;
  std::string mask_path;
  MaskFormat mask_format = MaskFormat::csv01;
  std::size_t mask_buildings = 10;
  std::size_t mask_size_min = 4;
  std::size_t mask_size_max = 12;

  KernelFamily kernel_family = KernelFamily::squared_exponential;
  double kernel_sigma_f2 = 1.0;
  double kernel_lambda = 8.0;
  double noise_var = 0.01;

  SamplerConfig sampler;

  KernelFamily fit_family = KernelFamily::exponential;
  std::size_t fit_n_train = 200;
  std::vector<double> fit_lambda_grid{2, 4, 6, 8, 12, 16, 24};
  std::vector<double> fit_noise_grid{1e-3, 1e-2, 1e-1};

  EstimatorKind estimator_kind = EstimatorKind::gp_posterior;
  double estimator_power = 2.0;

  double diag_r0 = 5.0;
  std::size_t field_max_cells = FieldSimulator::kDefaultMaxCells;
  MetricConfig metrics;

  std::string experiment;
  std::size_t trials = 300;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

/// Applies one `key = value` setting. Unknown keys and malformed values
/// throw ValidationError.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment. Every key is checked
/// before returning, and cross-field constraints are validated.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Cross-field checks (grid vs. window, sampler ranges, ...).
void validate(const ExperimentConfig& cfg);

Kernel true_kernel(const ExperimentConfig& cfg);
EnvironmentMask make_mask(const ExperimentConfig& cfg);
Testbed make_testbed(const ExperimentConfig& cfg);
SearchGrid search_grid(const ExperimentConfig& cfg);

}  // namespace tbslab
