#include "doctest.h"

#include <cmath>

#include "tbslab/errors.hpp"
#include "tbslab/metrics.hpp"

using namespace tbslab;

namespace {

FieldSample noise_field(const GridSpec& g, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n01;
  FieldSample f{g, std::vector<double>(g.cell_count())};
  for (auto& v : f.values) v = n01(rng);
  return f;
}

FieldSample smooth_field(const GridSpec& g) {
  FieldSample f{g, std::vector<double>(g.cell_count())};
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto c = g.coords(i);
    f.values[i] = 0.5 + 0.4 * std::sin(0.3 * double(c.row)) * std::cos(0.2 * double(c.col));
  }
  return f;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("rmse identities") {
  const GridSpec g(6, 6);
  const auto mask = EnvironmentMask::all_free(g);
  const FieldSample zero{g, std::vector<double>(36, 0.0)};
  const FieldSample tenth{g, std::vector<double>(36, 0.1)};
  CHECK(rmse(zero, zero, mask) == 0.0);
  CHECK(rmse(tenth, zero, mask) == doctest::Approx(0.1).epsilon(1e-15));

  auto alt = smooth_field(g);
  const auto truth = alt;
  for (std::size_t i = 0; i < 36; ++i) alt.values[i] += (i % 2 ? 0.07 : -0.07);
  CHECK(rmse(alt, truth, mask) == doctest::Approx(0.07).epsilon(1e-12));
}

TEST_CASE("rmse ignores buildings unless asked") {
  const GridSpec g(2, 2);
  const EnvironmentMask mask(g, {0, 1, 0, 0});
  const FieldSample truth{g, {0, 0, 0, 0}};
  const FieldSample est{g, {0, 5, 0, 0}};
  CHECK(rmse(est, truth, mask) == 0.0);
  MetricConfig all;
  all.exclude_buildings = false;
  CHECK(mse(est, truth, mask, all) == doctest::Approx(25.0 / 4.0));
}

TEST_CASE("rmse is a metric on random fields") {
  const GridSpec g(9, 7);
  const auto mask = EnvironmentMask::all_free(g);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto a = noise_field(g, 3 * s), b = noise_field(g, 3 * s + 1), c = noise_field(g, 3 * s + 2);
    REQUIRE(rmse(a, b, mask) == rmse(b, a, mask));
    REQUIRE(rmse(a, b, mask) >= 0.0);
    REQUIRE(rmse(a, c, mask) <= rmse(a, b, mask) + rmse(b, c, mask) + 1e-12);
  }
}

TEST_CASE("psnr") {
  CHECK(psnr_from_rmse(0.1) == 20.0);
  CHECK(psnr_from_rmse(0.01) == 40.0);
  CHECK(std::abs(psnr_from_rmse(0.0305) - 30.31) < 0.01);
  CHECK(std::isinf(psnr_from_rmse(0.0)));
  double prev = HUGE_VAL;
  for (double r = 0.001; r < 2.0; r *= 1.3) {
    const double p = psnr_from_rmse(r);
    REQUIRE(p < prev);
    prev = p;
  }
  CHECK_THROWS_AS(psnr_from_rmse(-1.0), ValidationError);
}

TEST_CASE("ssim") {
  const GridSpec g(24, 20);
  const auto x = smooth_field(g);
  CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-12));

  auto inv = x;
  for (auto& v : inv.values) v = 1.0 - v;
  CHECK(ssim(inv, x) < 1.0);

  const FieldSample c{g, std::vector<double>(g.cell_count(), 0.3)};
  CHECK(ssim(c, c) == doctest::Approx(1.0).epsilon(1e-12));

  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = noise_field(g, s), b = noise_field(g, s + 100);
    const double v = ssim(a, b);
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 1.0);
    REQUIRE(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  }

  CHECK_THROWS_AS(ssim(FieldSample{GridSpec(5, 5), std::vector<double>(25)},
                       FieldSample{GridSpec(5, 5), std::vector<double>(25)}),
                  ValidationError);
}

TEST_CASE("robustness gain") {
  CHECK(std::abs(robustness_gain(0.2632, 0.0571) - 78.31) <= 0.005);
  CHECK(std::abs(robustness_gain(0.2632, 0.0545) - 79.29) <= 0.005);
  CHECK(robustness_gain(0.3, 0.3) == 0.0);
  CHECK_THROWS_AS(robustness_gain(0.0, 0.1), ContractViolation);
}

TEST_CASE("metric config validation") {
  MetricConfig cfg;
  cfg.ssim_window = 10;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = {};
  cfg.dynamic_range = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
}

}  // TEST_SUITE
