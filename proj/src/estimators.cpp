#include "tbslab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "tbslab/errors.hpp"

namespace tbslab {

EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "gp_posterior") return EstimatorKind::gp_posterior;
  if (name == "idw") return EstimatorKind::idw;
  if (name == "nearest") return EstimatorKind::nearest;
  if (name == "fitted_gp") return EstimatorKind::fitted_gp;
  throw ValidationError("unknown estimator kind '" + std::string(name) + "'");
}

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::gp_posterior: return "gp_posterior";
    case EstimatorKind::idw: return "idw";
    case EstimatorKind::nearest: return "nearest";
    case EstimatorKind::fitted_gp: return "fitted_gp";
  }
  return "unknown";
}

EstimatorSpec EstimatorSpec::gp(const Kernel& kernel, double noise_var, std::string label) {
  EstimatorSpec s;
  s.kind = EstimatorKind::gp_posterior;
  s.kernel = kernel;
  s.noise_var = noise_var;
  s.label = std::move(label);
  return s;
}

EstimatorSpec EstimatorSpec::idw(double power, std::string label) {
  EstimatorSpec s;
  s.kind = EstimatorKind::idw;
  s.power = power;
  s.label = std::move(label);
  return s;
}

EstimatorSpec EstimatorSpec::nearest(std::string label) {
  EstimatorSpec s;
  s.kind = EstimatorKind::nearest;
  s.label = std::move(label);
  return s;
}

void validate(const EstimatorSpec& spec) {
  switch (spec.kind) {
    case EstimatorKind::gp_posterior:
    case EstimatorKind::fitted_gp:
      validate(spec.kernel);
      if (!(spec.noise_var >= 0.0) || !std::isfinite(spec.noise_var)) {
        throw ValidationError("estimator noise variance must be >= 0");
      }
      break;
    case EstimatorKind::idw:
      if (!(spec.power > 0.0)) throw ValidationError("idw power must be positive");
      break;
    case EstimatorKind::nearest:
      break;
  }
}

namespace {

std::vector<std::size_t> all_cells(const GridSpec& grid) {
  std::vector<std::size_t> all(grid.cell_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

void check_observation(const Observation& obs, const GridSpec& grid) {
  if (!(obs.source.grid == grid)) {
    throw ValidationError("observation was taken on a different grid");
  }
  if (obs.values.size() != obs.source.indices.size()) {
    throw ValidationError("observation length differs from its sampling set");
  }
  for (const auto i : obs.source.indices) {
    if (i >= grid.cell_count()) throw ValidationError("sample index out of range");
  }
}

void factor_system(Eigen::MatrixXd& system, double amplitude, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(system);
  if (llt.info() == Eigen::Success) return;
  factor_with_jitter(system, 1e-10 * amplitude, 1e-4 * amplitude, llt);
}

// d x m matrix of center distances (meters) from every cell to each sample.
Eigen::MatrixXd distances_to_samples(const GridSpec& grid, std::span<const std::size_t> samples) {
  const auto d = static_cast<Eigen::Index>(grid.cell_count());
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t a = 0; a < samples.size(); ++a) {
    for (Eigen::Index i = 0; i < d; ++i) {
      out(i, static_cast<Eigen::Index>(a)) = grid.distance(static_cast<std::size_t>(i), samples[a]);
    }
  }
  return out;
}

double free_mse(std::span<const double> estimate, std::span<const double> truth,
                const EnvironmentMask& mask, const MetricConfig& cfg) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (cfg.exclude_buildings && !mask.is_free(i)) continue;
    const double e = estimate[i] - truth[i];
    sum += e * e;
    ++n;
  }
  return sum / static_cast<double>(n);
}

}  // namespace

GpPosterior gp_posterior(const Kernel& kernel, double noise_var, const Observation& obs,
                         const GridSpec& grid, bool with_variance) {
  validate(kernel);
  if (!(noise_var >= 0.0)) throw ValidationError("gp_posterior: noise variance must be >= 0");
  check_observation(obs, grid);
  const auto d = grid.cell_count();
  const auto& idx = obs.source.indices;
  GpPosterior out{{grid, std::vector<double>(d, 0.0)}, {}, 0.0};

  if (idx.empty()) {
    if (with_variance) out.variance.assign(d, kernel.amplitude);
    out.posterior_trace = static_cast<double>(d) * kernel.amplitude;
    return out;
  }

  const auto all = all_cells(grid);
  const Eigen::MatrixXd cross = covariance_block(kernel, grid, all, idx);
  Eigen::MatrixXd system(static_cast<Eigen::Index>(idx.size()),
                         static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) {
    system.row(static_cast<Eigen::Index>(a)) = cross.row(static_cast<Eigen::Index>(idx[a]));
  }
  system.diagonal().array() += noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt;
  factor_system(system, kernel.amplitude, llt);

  const Eigen::Map<const Eigen::VectorXd> y(obs.values.data(),
                                            static_cast<Eigen::Index>(obs.values.size()));
  const Eigen::VectorXd weights = llt.solve(y);
  Eigen::Map<Eigen::VectorXd>(out.estimate.values.data(), static_cast<Eigen::Index>(d)) =
      cross * weights;

  if (with_variance) {
    const Eigen::MatrixXd half = llt.matrixL().solve(cross.transpose());
    out.variance.resize(d);
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      out.variance[i] = kernel.amplitude - half.col(static_cast<Eigen::Index>(i)).squaredNorm();
      trace += out.variance[i];
    }
    out.posterior_trace = trace;
  } else {
    out.posterior_trace = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

FieldSample idw_reconstruct(const Observation& obs, double power, const GridSpec& grid) {
  check_observation(obs, grid);
  if (obs.values.empty()) throw ValidationError("idw_reconstruct needs at least one sample");
  if (!(power > 0.0)) throw ValidationError("idw power must be positive");
  const auto& idx = obs.source.indices;
  FieldSample out{grid, std::vector<double>(grid.cell_count(), 0.0)};
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    double num = 0.0;
    double den = 0.0;
    bool exact = false;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] == i) {
        out.values[i] = obs.values[a];
        exact = true;
        break;
      }
      const double w = std::pow(grid.distance(i, idx[a]), -power);
      num += w * obs.values[a];
      den += w;
    }
    if (!exact) out.values[i] = num / den;
  }
  return out;
}

FieldSample nearest_reconstruct(const Observation& obs, const GridSpec& grid) {
  check_observation(obs, grid);
  if (obs.values.empty()) throw ValidationError("nearest_reconstruct needs at least one sample");
  const auto& idx = obs.source.indices;
  FieldSample out{grid, std::vector<double>(grid.cell_count(), 0.0)};
  for (std::size_t i = 0; i < grid.cell_count(); ++i) {
    const auto ci = grid.coords(i);
    std::size_t best = 0;
    long long best_d2 = std::numeric_limits<long long>::max();
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const auto ca = grid.coords(idx[a]);
      const long long dr = static_cast<long long>(ci.row) - static_cast<long long>(ca.row);
      const long long dc = static_cast<long long>(ci.col) - static_cast<long long>(ca.col);
      const long long d2 = dr * dr + dc * dc;
      if (d2 < best_d2 || (d2 == best_d2 && idx[a] < idx[best])) {
        best_d2 = d2;
        best = a;
      }
    }
    out.values[i] = obs.values[best];
  }
  return out;
}

FieldSample reconstruct(const EstimatorSpec& spec, const Observation& obs,
                        const GridSpec& grid) {
  validate(spec);
  switch (spec.kind) {
    case EstimatorKind::gp_posterior:
    case EstimatorKind::fitted_gp:
      return gp_posterior(spec.kernel, spec.noise_var, obs, grid, false).estimate;
    case EstimatorKind::idw:
      return idw_reconstruct(obs, spec.power, grid);
    case EstimatorKind::nearest:
      return nearest_reconstruct(obs, grid);
  }
  throw ValidationError("unknown estimator kind");
}

Testbed Testbed::make(EnvironmentMask mask, const Kernel& kernel, double noise_var,
                      std::size_t max_cells, MetricConfig metrics) {
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw ValidationError("noise variance must be >= 0");
  }
  validate(metrics);
  auto sim = std::make_shared<const FieldSimulator>(kernel, mask.grid(), max_cells);
  return Testbed{std::move(mask), kernel, noise_var, std::move(sim), metrics,
                 Execution::parallel};
}

std::optional<TrialDraw> draw_trial(const Testbed& bed, const SamplerConfig& mode,
                                    std::uint64_t seed, std::size_t trial) {
  auto mask_rng = trial_rng(seed, trial, Substream::mask);
  std::optional<SamplingSet> set;
  try {
    set = draw_sampling_set(bed.mask, mode, mask_rng);
  } catch (const StallError&) {
    return std::nullopt;
  }
  auto field_rng = trial_rng(seed, trial, Substream::field);
  auto noise_rng = trial_rng(seed, trial, Substream::noise);
  auto truth = bed.simulator->sample(field_rng);
  auto obs = observe(truth, *set, bed.noise_var, noise_rng);
  return TrialDraw{trial, std::move(truth), std::move(obs)};
}

namespace {

struct Evaluation {
  FieldSample estimate;
  double posterior_mse = std::numeric_limits<double>::quiet_NaN();
};
using Evaluator = std::function<Evaluation(const TrialDraw&)>;

struct TrialRecord {
  bool stalled = true;
  std::vector<double> mse, rmse, psnr, ssim, posterior;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<RiskReport> run_risk_loop(const Testbed& bed, const std::vector<Evaluator>& evals,
                                      const std::vector<std::string>& labels,
                                      const SamplerConfig& test_mode, std::size_t n_trials,
                                      std::uint64_t seed) {
  if (n_trials < 2) throw ValidationError("risk estimation needs at least 2 trials");
  validate(test_mode, bed.mask);
  const auto& grid = bed.grid();
  const bool ssim_ok =
      grid.width() >= bed.metrics.ssim_window && grid.height() >= bed.metrics.ssim_window;
  const std::size_t k = evals.size();

  std::vector<TrialRecord> records(n_trials);
  for_each_index(bed.exec, n_trials, [&](std::size_t t) {
    auto draw = draw_trial(bed, test_mode, seed, t);
    if (!draw) return;
    TrialRecord rec;
    rec.stalled = false;
    for (std::size_t e = 0; e < k; ++e) {
      const auto ev = evals[e](*draw);
      const double err = free_mse(ev.estimate.values, draw->truth.values, bed.mask, bed.metrics);
      rec.mse.push_back(err);
      rec.rmse.push_back(std::sqrt(err));
      rec.psnr.push_back(psnr_from_rmse(std::sqrt(err), bed.metrics.dynamic_range));
      rec.ssim.push_back(ssim_ok ? ssim(ev.estimate, draw->truth, bed.metrics)
                                 : std::numeric_limits<double>::quiet_NaN());
      rec.posterior.push_back(ev.posterior_mse);
    }
    records[t] = std::move(rec);
  });

  std::vector<RiskReport> reports(k);
  for (std::size_t e = 0; e < k; ++e) {
    auto& r = reports[e];
    r.estimator = labels[e];
    r.test_mode = std::string(to_string(test_mode.mode));
    std::vector<double> rmse, psnr, ssim_v, post;
    for (std::size_t t = 0; t < n_trials; ++t) {
      const auto& rec = records[t];
      if (rec.stalled) {
        ++r.stalls;
        continue;
      }
      r.trial_ids.push_back(t);
      r.trial_mse.push_back(rec.mse[e]);
      rmse.push_back(rec.rmse[e]);
      psnr.push_back(rec.psnr[e]);
      ssim_v.push_back(rec.ssim[e]);
      post.push_back(rec.posterior[e]);
    }
    r.trials = r.trial_mse.size();
    if (r.trials < 2) {
      throw StallBudgetError("only " + std::to_string(r.trials) + " of " +
                             std::to_string(n_trials) + " trials completed");
    }
    r.mean_mse = mean_of(r.trial_mse);
    double ss = 0.0;
    for (const double x : r.trial_mse) ss += (x - r.mean_mse) * (x - r.mean_mse);
    r.stderr_mse = std::sqrt(ss / static_cast<double>(r.trials - 1)) /
                   std::sqrt(static_cast<double>(r.trials));
    r.mean_rmse = mean_of(rmse);
    r.mean_psnr = mean_of(psnr);
    r.mean_ssim = mean_of(ssim_v);
    r.mean_posterior_mse = mean_of(post);
  }
  return reports;
}

Evaluator make_evaluator(const Testbed& bed, const EstimatorSpec& spec) {
  validate(spec);
  if (spec.kind == EstimatorKind::gp_posterior) {
    return [&bed, spec](const TrialDraw& draw) {
      auto post = gp_posterior(spec.kernel, spec.noise_var, draw.obs, bed.grid(), true);
      double sum = 0.0;
      for (const auto i : bed.mask.free_cells()) sum += post.variance[i];
      return Evaluation{std::move(post.estimate),
                        sum / static_cast<double>(bed.mask.free_cells().size())};
    };
  }
  return [&bed, spec](const TrialDraw& draw) {
    return Evaluation{reconstruct(spec, draw.obs, bed.grid())};
  };
}

}  // namespace

std::vector<RiskReport> evaluate_risks(const Testbed& bed, std::span<const EstimatorSpec> specs,
                                       const SamplerConfig& test_mode, std::size_t n_trials,
                                       std::uint64_t seed) {
  std::vector<Evaluator> evals;
  std::vector<std::string> labels;
  for (const auto& s : specs) {
    evals.push_back(make_evaluator(bed, s));
    labels.push_back(s.name());
  }
  return run_risk_loop(bed, evals, labels, test_mode, n_trials, seed);
}

RiskReport estimate_risk(const Testbed& bed, const EstimatorSpec& spec,
                         const SamplerConfig& test_mode, std::size_t n_trials,
                         std::uint64_t seed) {
  return evaluate_risks(bed, std::span<const EstimatorSpec>(&spec, 1), test_mode, n_trials,
                        seed)
      .front();
}

RiskReport estimate_risk(const Testbed& bed, const Reconstructor& fn, std::string label,
                         const SamplerConfig& test_mode, std::size_t n_trials,
                         std::uint64_t seed) {
  std::vector<Evaluator> evals{[&fn](const TrialDraw& d) { return Evaluation{fn(d)}; }};
  return run_risk_loop(bed, evals, {std::move(label)}, test_mode, n_trials, seed).front();
}

EstimatorSpec FittedParams::as_estimator(std::string label) const {
  EstimatorSpec s;
  s.kind = EstimatorKind::fitted_gp;
  s.kernel = kernel;
  s.noise_var = noise_var;
  s.label = std::move(label);
  return s;
}

FittedParams fit_estimator(const Testbed& bed, KernelFamily family,
                           const SamplerConfig& train_mode, std::size_t n_train,
                           const SearchGrid& search, std::uint64_t seed) {
  if (n_train == 0) throw ValidationError("fit_estimator: n_train must be >= 1");
  if (search.length_scales.empty() || search.noise_vars.empty()) {
    throw ValidationError("fit_estimator: search grids must be nonempty");
  }
  auto lambdas = search.length_scales;
  auto noises = search.noise_vars;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  std::sort(noises.begin(), noises.end());
  noises.erase(std::unique(noises.begin(), noises.end()), noises.end());
  for (const double l : lambdas) {
    if (!(l > 0.0)) throw ValidationError("fit_estimator: length scales must be positive");
  }
  for (const double s : noises) {
    if (!(s >= 0.0)) throw ValidationError("fit_estimator: noise variances must be >= 0");
  }
  validate(train_mode, bed.mask);

  const std::size_t n_cand = lambdas.size() * noises.size();
  const double amplitude = bed.kernel.amplitude;
  std::vector<std::vector<double>> risks(n_train);

  for_each_index(bed.exec, n_train, [&](std::size_t t) {
    const auto draw = draw_trial(bed, train_mode, seed, t);
    if (!draw) return;
    const auto& idx = draw->obs.source.indices;
    const auto m = static_cast<Eigen::Index>(idx.size());
    const Eigen::MatrixXd dist = distances_to_samples(bed.grid(), idx);
    const Eigen::Map<const Eigen::VectorXd> y(draw->obs.values.data(), m);
    std::vector<double> row(n_cand);
    std::vector<double> estimate(bed.grid().cell_count());
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      const Kernel k{family, amplitude, lambdas[li]};
      const Eigen::MatrixXd cross = dist.unaryExpr([&k](double r) { return k(r); });
      Eigen::MatrixXd base(m, m);
      for (Eigen::Index a = 0; a < m; ++a) base.row(a) = cross.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]));
      for (std::size_t ni = 0; ni < noises.size(); ++ni) {
        Eigen::MatrixXd system = base;
        system.diagonal().array() += noises[ni];
        Eigen::LLT<Eigen::MatrixXd> llt;
        factor_system(system, amplitude, llt);
        Eigen::Map<Eigen::VectorXd>(estimate.data(), cross.rows()) = cross * llt.solve(y);
        row[li * noises.size() + ni] =
            free_mse(estimate, draw->truth.values, bed.mask, bed.metrics);
      }
    }
    risks[t] = std::move(row);
  });

  FittedParams fit;
  fit.train_mode = train_mode.mode;
  std::vector<double> totals(n_cand, 0.0);
  std::size_t used = 0;
  for (const auto& row : risks) {
    if (row.empty()) {
      ++fit.stalls;
      continue;
    }
    ++used;
    for (std::size_t c = 0; c < n_cand; ++c) totals[c] += row[c];
  }
  if (used == 0 || fit.stalls * 10 > n_train) {
    throw StallBudgetError("fit_estimator: " + std::to_string(fit.stalls) + " of " +
                           std::to_string(n_train) + " training draws stalled");
  }
  std::size_t best = 0;
  for (std::size_t c = 0; c < n_cand; ++c) {
    const double risk = totals[c] / static_cast<double>(used);
    fit.candidates.push_back({lambdas[c / noises.size()], noises[c % noises.size()], risk});
    if (risk < fit.candidates[best].risk) best = c;
  }
  fit.kernel = Kernel{family, amplitude, fit.candidates[best].length_scale};
  fit.noise_var = fit.candidates[best].noise_var;
  fit.train_risk = fit.candidates[best].risk;
  return fit;
}

}  // namespace tbslab
