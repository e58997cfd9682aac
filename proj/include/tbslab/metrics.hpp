#pragma once

#include <cstddef>

#include "tbslab/grid.hpp"

namespace tbslab {

struct MetricConfig {
  double dynamic_range = 1.0;
  std::size_t ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_k1 = 0.01;
  double ssim_k2 = 0.03;
  /// RMSE and PSNR skip building cells when set. SSIM always uses every cell.
  bool exclude_buildings = true;

  double c1() const noexcept { return (ssim_k1 * dynamic_range) * (ssim_k1 * dynamic_range); }
  double c2() const noexcept { return (ssim_k2 * dynamic_range) * (ssim_k2 * dynamic_range); }
};

void validate(const MetricConfig& cfg);

double mse(const FieldSample& estimate, const FieldSample& truth,
           const EnvironmentMask& mask, const MetricConfig& cfg = {});
double rmse(const FieldSample& estimate, const FieldSample& truth,
            const EnvironmentMask& mask, const MetricConfig& cfg = {});

/// 20 log10(range / rmse); +infinity when rmse is zero.
double psnr_from_rmse(double rmse, double dynamic_range = 1.0);
double psnr(const FieldSample& estimate, const FieldSample& truth,
            const EnvironmentMask& mask, const MetricConfig& cfg = {});

/// Mean single-scale SSIM over all valid (fully inside) Gaussian windows.
double ssim(const FieldSample& estimate, const FieldSample& truth,
            const MetricConfig& cfg = {});

/// Relative RMSE reduction against a baseline, in percent.
double robustness_gain(double rmse_baseline, double rmse_method);

}  // namespace tbslab
