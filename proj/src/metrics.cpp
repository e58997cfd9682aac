#include "tbslab/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tbslab/errors.hpp"

namespace tbslab {

void validate(const MetricConfig& cfg) {
  if (cfg.ssim_window % 2 == 0 || cfg.ssim_window == 0) {
    throw ValidationError("ssim window must be odd");
  }
  if (!(cfg.ssim_sigma > 0.0) || !(cfg.dynamic_range > 0.0) || !(cfg.ssim_k1 > 0.0) ||
      !(cfg.ssim_k2 > 0.0)) {
    throw ValidationError("metric constants must be positive");
  }
}

namespace {

void check_same_grid(const FieldSample& a, const FieldSample& b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    throw ValidationError("metric inputs live on different grids");
  }
}

}  // namespace

double mse(const FieldSample& estimate, const FieldSample& truth,
           const EnvironmentMask& mask, const MetricConfig& cfg) {
  check_same_grid(estimate, truth);
  if (!(mask.grid() == truth.grid)) throw ValidationError("mask and field grids differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.values.size(); ++i) {
    if (cfg.exclude_buildings && !mask.is_free(i)) continue;
    const double e = estimate.values[i] - truth.values[i];
    sum += e * e;
    ++n;
  }
  return sum / static_cast<double>(n);
}

double rmse(const FieldSample& estimate, const FieldSample& truth,
            const EnvironmentMask& mask, const MetricConfig& cfg) {
  return std::sqrt(mse(estimate, truth, mask, cfg));
}

double psnr_from_rmse(double rmse, double dynamic_range) {
  if (!(rmse >= 0.0)) throw ContractViolation("psnr: rmse must be >= 0");
  if (rmse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(dynamic_range / rmse);
}

double psnr(const FieldSample& estimate, const FieldSample& truth,
            const EnvironmentMask& mask, const MetricConfig& cfg) {
  return psnr_from_rmse(rmse(estimate, truth, mask, cfg), cfg.dynamic_range);
}

double ssim(const FieldSample& estimate, const FieldSample& truth, const MetricConfig& cfg) {
  validate(cfg);
  check_same_grid(estimate, truth);
  const auto& g = truth.grid;
  const std::size_t win = cfg.ssim_window;
  if (g.width() < win || g.height() < win) {
    throw ValidationError("grid " + std::to_string(g.width()) + "x" +
                          std::to_string(g.height()) + " is smaller than the " +
                          std::to_string(win) + "-cell SSIM window");
  }

  std::vector<double> taps(win);
  const double half = static_cast<double>(win / 2);
  double total = 0.0;
  for (std::size_t k = 0; k < win; ++k) {
    const double u = (static_cast<double>(k) - half) / cfg.ssim_sigma;
    taps[k] = std::exp(-0.5 * u * u);
    total += taps[k];
  }
  for (auto& t : taps) t /= total;

  const std::size_t W = g.width();
  const std::size_t H = g.height();
  const std::size_t out_w = W - win + 1;
  const std::size_t out_h = H - win + 1;

  // Separable Gaussian filtering of x, y, x^2, y^2, xy over valid positions.
  auto filter = [&](auto&& value) {
    std::vector<double> horiz(H * out_w);
    for (std::size_t r = 0; r < H; ++r) {
      for (std::size_t c = 0; c < out_w; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < win; ++k) acc += taps[k] * value(r * W + c + k);
        horiz[r * out_w + c] = acc;
      }
    }
    std::vector<double> out(out_h * out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
      for (std::size_t c = 0; c < out_w; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < win; ++k) acc += taps[k] * horiz[(r + k) * out_w + c];
        out[r * out_w + c] = acc;
      }
    }
    return out;
  };

  const auto& x = estimate.values;
  const auto& y = truth.values;
  const auto mx = filter([&](std::size_t i) { return x[i]; });
  const auto my = filter([&](std::size_t i) { return y[i]; });
  const auto mxx = filter([&](std::size_t i) { return x[i] * x[i]; });
  const auto myy = filter([&](std::size_t i) { return y[i] * y[i]; });
  const auto mxy = filter([&](std::size_t i) { return x[i] * y[i]; });

  const double c1 = cfg.c1();
  const double c2 = cfg.c2();
  double sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double vx = mxx[i] - mx[i] * mx[i];
    const double vy = myy[i] - my[i] * my[i];
    const double cxy = mxy[i] - mx[i] * my[i];
    sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
           ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return sum / static_cast<double>(mx.size());
}

double robustness_gain(double rmse_baseline, double rmse_method) {
  if (!(rmse_baseline > 0.0)) {
    throw ContractViolation("robustness_gain: baseline RMSE must be positive");
  }
  return 100.0 * (rmse_baseline - rmse_method) / rmse_baseline;
}

}  // namespace tbslab
