#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tbslab/gaussian_field.hpp"
#include "tbslab/parallel.hpp"
#include "tbslab/samplers.hpp"

namespace tbslab {

/// phi(r) = 1 if r <= r0 (meters).
struct IndicatorProximity {
  double r0 = 5.0;
};
/// phi(r) = kernel(r).
struct KernelProximity {
  Kernel kernel;
};
using ProximityFunction = std::variant<IndicatorProximity, KernelProximity>;

/// Mean of phi over all unordered pairs of sampled cells. Needs m >= 2.
double proximity_statistic(const SamplingSet& s, const GridSpec& grid,
                           const ProximityFunction& phi);

/// Log-det information of a sampling set and its diagonal/off-diagonal
/// second-order expansion. All terms in nats and carry the 1/2 prefactor.
struct MIReport {
  double exact = 0.0;      // 1/2 logdet(I + g A)
  double diag_term = 0.0;  // 1/2 logdet(I + g D)
  double penalty = 0.0;    // 1/4 tr([(I + g D)^-1 g E]^2)
  double approx = 0.0;     // diag_term - penalty
  double residual = 0.0;   // exact - approx
};

/// From an explicit sampled covariance A (symmetric). Throws NumericalError
/// when I + A / noise_var is not positive definite.
MIReport mutual_information(const Eigen::MatrixXd& covariance, double noise_var);

MIReport mutual_information(const Kernel& kernel, double noise_var, const SamplingSet& s,
                            const GridSpec& grid);

struct ProximityStat {
  ProximityFunction phi;
};
struct MutualInfoStat {
  Kernel kernel;
  double noise_var = 0.01;
};
using SetStatistic = std::variant<ProximityStat, MutualInfoStat>;

struct StatisticEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t trials = 0;
  std::size_t stalls = 0;
};

/// Monte Carlo mean and standard error of a statistic over sampling sets
/// drawn from `mode`. Set t uses the stream (seed, t). Throws
/// StallBudgetError when more than 10% of the draws stall.
StatisticEstimate expected_statistic(const SamplerConfig& mode, const EnvironmentMask& mask,
                                     const SetStatistic& statistic, std::size_t n_trials,
                                     std::uint64_t seed,
                                     Execution exec = Execution::parallel);

struct ExpectationComparison {
  StatisticEstimate a;
  StatisticEstimate b;
  double z_score = 0.0;  // (mean_a - mean_b) / sqrt(se_a^2 + se_b^2); 0 when both agree exactly
};

ExpectationComparison compare_estimates(const StatisticEstimate& a, const StatisticEstimate& b);

/// Runs expected_statistic for both modes from the same seed.
ExpectationComparison compare_distributions(const SamplerConfig& mode_a,
                                            const SamplerConfig& mode_b,
                                            const EnvironmentMask& mask,
                                            const SetStatistic& statistic,
                                            std::size_t n_trials, std::uint64_t seed,
                                            Execution exec = Execution::parallel);

/// z of the mean of paired differences (a_t - b_t) over trials present in
/// both series. Used for comparisons on common random numbers.
double paired_z(std::span<const std::size_t> ids_a, std::span<const double> a,
                std::span<const std::size_t> ids_b, std::span<const double> b);

/// Excess-risk split. r_cr: trajectory-tested risk of the random-fitted
/// model; r_cc: trajectory-tested risk of the trajectory-fitted model;
/// r_rr: random-tested risk of the random-fitted model.
struct RiskTriple {
  double r_cr = 0.0;
  double r_cc = 0.0;
  double r_rr = 0.0;
};

struct RiskDecomposition {
  double mismatch = 0.0;   // r_cr - r_cc
  double intrinsic = 0.0;  // r_cc - r_rr
  double total = 0.0;      // r_cr - r_rr
};

RiskDecomposition decompose_risk(const RiskTriple& risks);

/// Synthetic m x m covariance with unit diagonal and off-diagonal entries
/// scale * u_ab, u_ab uniform in [0, 1], fixed by `seed`. Nonnegative like
/// the covariances of both kernel families.
Eigen::MatrixXd synthetic_covariance(std::size_t m, double scale, std::uint64_t seed);

struct TaylorScalingPoint {
  double scale = 0.0;
  MIReport report;
  double shrink = 0.0;  // |residual| / |previous residual|; 0 for the first point
};

/// Residual of the second-order expansion as the off-diagonal scale halves,
/// on one fixed synthetic pattern (unit noise variance).
std::vector<TaylorScalingPoint> taylor_residual_sweep(std::size_t m,
                                                      std::span<const double> scales,
                                                      std::uint64_t seed);

}  // namespace tbslab
