#include "tbslab/experiment.hpp"

#include <cmath>
#include <cstdio>

#include "tbslab/errors.hpp"
#include "tbslab/report_io.hpp"

namespace tbslab {
namespace {

SamplerConfig trajectory_mode(const ExperimentConfig& cfg) {
  auto s = SamplerConfig::st_tbs(cfg.sampler.m, cfg.sampler.p_persist, cfg.sampler.p_trig);
  s.step_budget = cfg.sampler.step_budget;
  return s;
}

SamplerConfig random_mode(const ExperimentConfig& cfg) {
  return SamplerConfig::random(cfg.sampler.m);
}

std::vector<EstimatorSpec> compared_estimators(const Testbed& bed, const FitPair& fits) {
  return {EstimatorSpec::gp(bed.kernel, bed.noise_var, kOracleLabel),
          fits.random.as_estimator(kFitRandomLabel),
          fits.trajectory.as_estimator(kFitTrajectoryLabel)};
}

std::string train_of(const std::string& label) {
  if (label == kFitRandomLabel) return "random";
  if (label == kFitTrajectoryLabel) return "st_tbs";
  return "none";
}

void finalize_g_rob(ResultTable& table, std::string_view baseline_test) {
  const double base = table.at("random", baseline_test, kFitRandomLabel).report.mean_rmse;
  for (auto& row : table.rows) row.g_rob = robustness_gain(base, row.report.mean_rmse);
}

void append(ResultTable& table, const std::vector<RiskReport>& reports,
            const std::string& test_label, std::size_t requested) {
  for (const auto& r : reports) {
    enforce_stall_budget(r, requested);
    ResultRow row{train_of(r.estimator), test_label, r,
                  std::numeric_limits<double>::quiet_NaN()};
    row.report.test_mode = test_label;
    table.rows.push_back(std::move(row));
  }
}

FitPair resolve_fits(const ExperimentConfig& cfg, const Testbed& bed, const FitPair* fits) {
  return fits ? *fits : fit_pair(cfg, bed);
}

FieldSample abs_error(const FieldSample& a, const FieldSample& b) {
  FieldSample out{a.grid, std::vector<double>(a.values.size())};
  for (std::size_t i = 0; i < a.values.size(); ++i) out.values[i] = std::abs(a.values[i] - b.values[i]);
  return out;
}

}  // namespace

const ResultRow& ResultTable::at(std::string_view train, std::string_view test,
                                 std::string_view estimator) const {
  for (const auto& row : rows) {
    if (row.train_mode == train && row.test_mode == test && row.report.estimator == estimator) {
      return row;
    }
  }
  throw ValidationError("result table has no row " + std::string(train) + " -> " +
                        std::string(test) + " for " + std::string(estimator));
}

std::string alpha_label(double alpha) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "hybrid:alpha=%g", alpha);
  return buf;
}

std::string ell_label(std::size_t ell) { return "ell_tbs:ell=" + std::to_string(ell); }

void enforce_stall_budget(const RiskReport& report, std::size_t requested) {
  if (report.stalls * 10 > requested) {
    throw StallBudgetError(report.estimator + " under " + report.test_mode + ": " +
                           std::to_string(report.stalls) + " of " + std::to_string(requested) +
                           " trials stalled (limit 10%)");
  }
}

FitPair fit_pair(const ExperimentConfig& cfg, const Testbed& bed) {
  const auto seed = derive_seed(cfg.seed, "fit");
  const auto grid = search_grid(cfg);
  FitPair fits;
  fits.random = fit_estimator(bed, cfg.fit_family, random_mode(cfg), cfg.fit_n_train, grid, seed);
  fits.trajectory =
      fit_estimator(bed, cfg.fit_family, trajectory_mode(cfg), cfg.fit_n_train, grid, seed);
  return fits;
}

FitPair run_cross_eval(const ExperimentConfig& cfg, const Testbed& bed, ResultTable& table,
                       const FitPair* fits_in, const CrossEvalOptions& options) {
  const auto fits = resolve_fits(cfg, bed, fits_in);
  const auto seed = derive_seed(cfg.seed, "cross_eval");
  const auto specs = compared_estimators(bed, fits);

  ResultTable local;
  for (const auto& mode : {random_mode(cfg), trajectory_mode(cfg)}) {
    const auto label = std::string(to_string(mode.mode));
    const auto reports = evaluate_risks(bed, specs, mode, cfg.trials, seed);
    append(local, reports, label, cfg.trials);
    for (const auto* name : {kFitRandomLabel, kFitTrajectoryLabel, kOracleLabel}) {
      table.rows.push_back(local.at(train_of(name), label, name));
    }

    if (!options.heatmap_dir.empty()) {
      std::filesystem::create_directories(options.heatmap_dir);
      if (const auto draw = draw_trial(bed, mode, seed, 0)) {
        for (const auto* name : {kFitRandomLabel, kFitTrajectoryLabel}) {
          const auto& spec = name == std::string(kFitRandomLabel) ? specs[1] : specs[2];
          const auto estimate = reconstruct(spec, draw->obs, bed.grid());
          const auto stem = train_of(name) + "_to_" + label;
          FieldSample marks{bed.grid(), std::vector<double>(bed.grid().cell_count(), 0.0)};
          for (const auto i : draw->obs.source.indices) marks.values[i] = 1.0;
          emit_heatmap(draw->truth, options.heatmap_dir / (stem + "_truth.pgm"));
          emit_heatmap(marks, options.heatmap_dir / (stem + "_samples.pgm"), &draw->obs.source);
          emit_heatmap(estimate, options.heatmap_dir / (stem + "_estimate.pgm"));
          emit_heatmap(abs_error(estimate, draw->truth),
                       options.heatmap_dir / (stem + "_error.pgm"));
        }
      }
    }
  }
  finalize_g_rob(table, "st_tbs");
  return fits;
}

FitPair run_alpha_sweep(const ExperimentConfig& cfg, const Testbed& bed, ResultTable& table,
                        const FitPair* fits_in) {
  const auto fits = resolve_fits(cfg, bed, fits_in);
  const auto seed = derive_seed(cfg.seed, "alpha_sweep");
  const auto specs = compared_estimators(bed, fits);
  for (const double alpha : kAlphaGrid) {
    auto mode = SamplerConfig::hybrid(cfg.sampler.m, alpha, cfg.sampler.p_persist,
                                      cfg.sampler.p_trig);
    mode.step_budget = cfg.sampler.step_budget;
    append(table, evaluate_risks(bed, specs, mode, cfg.trials, seed), alpha_label(alpha),
           cfg.trials);
  }
  finalize_g_rob(table, alpha_label(1.0));
  return fits;
}

FitPair run_ell_sweep(const ExperimentConfig& cfg, const Testbed& bed, ResultTable& table,
                      const FitPair* fits_in) {
  const auto fits = resolve_fits(cfg, bed, fits_in);
  const auto seed = derive_seed(cfg.seed, "ell_sweep");
  const auto specs = compared_estimators(bed, fits);
  append(table, evaluate_risks(bed, specs, random_mode(cfg), cfg.trials, seed), "random",
         cfg.trials);
  append(table, evaluate_risks(bed, specs, trajectory_mode(cfg), cfg.trials, seed), "st_tbs",
         cfg.trials);
  for (const auto ell : kEllGrid) {
    auto mode = SamplerConfig::ell_tbs(cfg.sampler.m, ell, cfg.sampler.p_persist);
    mode.step_budget = cfg.sampler.step_budget;
    append(table, evaluate_risks(bed, specs, mode, cfg.trials, seed), ell_label(ell), cfg.trials);
  }
  finalize_g_rob(table, "st_tbs");
  return fits;
}

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::trivially_equal: return "trivially_equal";
  }
  return "fail";
}

double random_proximity_expectation(const EnvironmentMask& mask, double r0) {
  const auto free = mask.free_cells();
  const auto& g = mask.grid();
  double close = 0.0;
  for (std::size_t a = 0; a < free.size(); ++a) {
    for (std::size_t b = a + 1; b < free.size(); ++b) {
      if (g.distance(free[a], free[b]) <= r0) close += 1.0;
    }
  }
  const double n = static_cast<double>(free.size());
  return close / (0.5 * n * (n - 1.0));
}

InfoSuiteResult run_info_suite(const ExperimentConfig& cfg, const EnvironmentMask& mask) {
  InfoSuiteResult out;
  const auto seed = derive_seed(cfg.seed, "info_suite");
  const auto rnd = random_mode(cfg);
  const auto traj = trajectory_mode(cfg);
  const double r0 = cfg.diag_r0 * cfg.cell_size;
  const SetStatistic proximity = ProximityStat{IndicatorProximity{r0}};

  auto add_rows = [&](const SamplerConfig& a, const std::string& a_name, const SamplerConfig& b,
                      const std::string& statistic, double param, const SetStatistic& stat) {
    const auto cmp = compare_distributions(a, b, mask, stat, cfg.trials, seed);
    out.rows.push_back({a_name, statistic, param, cmp.a});
    out.rows.push_back({std::string(to_string(b.mode)), statistic, param, cmp.b});
    return cmp;
  };
  auto directional = [](const std::string& name, const ExpectationComparison& cmp,
                        double threshold, bool upper) {
    CheckRow row{name, cmp.z_score, threshold, CheckStatus::fail};
    if (cmp.a.mean == cmp.b.mean) {
      row.status = CheckStatus::trivially_equal;
    } else if (upper ? cmp.z_score >= threshold : cmp.z_score <= threshold) {
      row.status = CheckStatus::pass;
    }
    return row;
  };

  const auto prox = add_rows(traj, "st_tbs", rnd, "proximity_indicator", cfg.diag_r0, proximity);
  out.checks.push_back(directional("proximity_st_tbs_above_random", prox, 3.0, true));

  {
    const double expected = random_proximity_expectation(mask, r0);
    const double diff = prox.b.mean - expected;
    CheckRow row{"proximity_random_matches_pair_count", 0.0, 3.0, CheckStatus::fail};
    if (diff == 0.0) {
      row.status = CheckStatus::pass;
    } else if (prox.b.stderr_mean > 0.0) {
      row.value = std::abs(diff) / prox.b.stderr_mean;
      if (row.value <= 3.0) row.status = CheckStatus::pass;
    } else {
      row.value = HUGE_VAL;
    }
    out.checks.push_back(row);
  }

  for (const auto family : {KernelFamily::squared_exponential, KernelFamily::exponential}) {
    const Kernel k{family, cfg.kernel_sigma_f2, cfg.kernel_lambda * cfg.cell_size};
    const auto name = "mi_" + std::string(to_string(family)) + "_nats";
    const auto cmp = add_rows(traj, "st_tbs", rnd, name, cfg.kernel_lambda,
                              MutualInfoStat{k, cfg.noise_var});
    out.checks.push_back(
        directional("mi_" + std::string(to_string(family)) + "_st_tbs_below_random", cmp, -3.0,
                    false));
  }

  {
    const auto base = expected_statistic(rnd, mask, proximity, cfg.trials, seed);
    double previous = HUGE_VAL;
    double worst_rise = -HUGE_VAL;
    for (const auto ell : kEllTrend) {
      auto mode = SamplerConfig::ell_tbs(cfg.sampler.m, ell, cfg.sampler.p_persist);
      mode.step_budget = cfg.sampler.step_budget;
      const auto est = expected_statistic(mode, mask, proximity, cfg.trials, seed);
      out.rows.push_back({ell_label(ell), "proximity_indicator", cfg.diag_r0, est});
      const double z = compare_estimates(est, base).z_score;
      if (previous != HUGE_VAL) worst_rise = std::max(worst_rise, z - previous);
      previous = z;
    }
    out.checks.push_back({"proximity_z_decreases_with_ell", worst_rise, 2.0,
                          worst_rise <= 2.0 ? CheckStatus::pass : CheckStatus::fail});
  }

  {
    const double scales[] = {0.2, 0.1, 0.05, 0.025};
    const auto sweep = taylor_residual_sweep(5, scales, derive_seed(seed, "taylor"));
    double worst = 0.0;
    for (std::size_t i = 1; i < sweep.size(); ++i) worst = std::max(worst, sweep[i].shrink);
    out.checks.push_back({"taylor_residual_shrink_per_halving", worst, 0.3,
                          worst <= 0.3 ? CheckStatus::pass : CheckStatus::fail});
    const auto zero = mutual_information(synthetic_covariance(5, 0.0, 1), 1.0);
    out.checks.push_back({"taylor_residual_zero_without_offdiag", std::abs(zero.residual), 0.0,
                          zero.residual == 0.0 ? CheckStatus::pass : CheckStatus::fail});
  }
  return out;
}

}  // namespace tbslab
