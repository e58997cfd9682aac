#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tbslab/config.hpp"
#include "tbslab/diagnostics.hpp"
#include "tbslab/estimators.hpp"

namespace tbslab {

inline constexpr const char* kToolName = "tbslab";
inline constexpr const char* kToolVersion = TBSLAB_VERSION;

struct ResultRow {
  std::string train_mode;  // "random", "st_tbs", or "none" for the Bayes oracle
  std::string test_mode;   // mode name, with the swept parameter appended
  RiskReport report;
  double g_rob = 0.0;      // percent, against the table's degraded baseline row
};

struct ResultTable {
  std::vector<ResultRow> rows;

  /// Row lookup by (train_mode, test_mode, estimator label).
  const ResultRow& at(std::string_view train, std::string_view test,
                      std::string_view estimator) const;
};

/// theta_R (fitted on random masks) and theta_C (fitted on st_tbs masks),
/// both with the configured, deliberately misspecified kernel family.
struct FitPair {
  FittedParams random;
  FittedParams trajectory;
};

inline constexpr const char* kOracleLabel = "bayes_oracle";
inline constexpr const char* kFitRandomLabel = "fitted_random";
inline constexpr const char* kFitTrajectoryLabel = "fitted_st_tbs";

FitPair fit_pair(const ExperimentConfig& cfg, const Testbed& bed);

struct CrossEvalOptions {
  /// Where the truth/samples/estimate/error heatmaps go; none when empty.
  std::filesystem::path heatmap_dir;
};

/// Fits theta_R and theta_C (unless `fits` is given), then evaluates both
/// and the Bayes oracle under random and st_tbs test masks on shared
/// draws. Rows are appended to `table` as they complete. Throws
/// StallBudgetError when more than 10% of trials stall.
FitPair run_cross_eval(const ExperimentConfig& cfg, const Testbed& bed, ResultTable& table,
                       const FitPair* fits = nullptr, const CrossEvalOptions& options = {});

/// Oracle, theta_R and theta_C over hybrid alpha in {0, 0.2, 0.5, 0.7, 1}.
FitPair run_alpha_sweep(const ExperimentConfig& cfg, const Testbed& bed, ResultTable& table,
                        const FitPair* fits = nullptr);

/// Oracle, theta_R and theta_C under random, st_tbs, ell_tbs(10), ell_tbs(5).
FitPair run_ell_sweep(const ExperimentConfig& cfg, const Testbed& bed, ResultTable& table,
                      const FitPair* fits = nullptr);

inline constexpr double kAlphaGrid[] = {0.0, 0.2, 0.5, 0.7, 1.0};
inline constexpr std::size_t kEllGrid[] = {10, 5};
inline constexpr std::size_t kEllTrend[] = {1, 5, 10, 20};

std::string alpha_label(double alpha);
std::string ell_label(std::size_t ell);

struct DiagnosticRow {
  std::string mode;
  std::string statistic;
  double r0_or_lambda = 0.0;  // cells
  StatisticEstimate estimate;
};

enum class CheckStatus { pass, fail, trivially_equal };
std::string_view to_string(CheckStatus status);

struct CheckRow {
  std::string check;
  double value = 0.0;      // z-score or shrink ratio
  double threshold = 0.0;
  CheckStatus status = CheckStatus::fail;
};

struct InfoSuiteResult {
  std::vector<DiagnosticRow> rows;
  std::vector<CheckRow> checks;
};

/// st_tbs against random on the proximity statistic and on log-det
/// information (both kernel families), plus the random pair-count check,
/// the ell trend and the Taylor residual sweep.
InfoSuiteResult run_info_suite(const ExperimentConfig& cfg, const EnvironmentMask& mask);

/// Exact E[T] for uniform sampling without replacement: the fraction of
/// distinct free-cell pairs within r0 meters.
double random_proximity_expectation(const EnvironmentMask& mask, double r0);

/// Checks that every report completed at least 90% of its trials.
void enforce_stall_budget(const RiskReport& report, std::size_t requested);

}  // namespace tbslab
