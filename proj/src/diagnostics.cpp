#include "tbslab/diagnostics.hpp"

#include <cmath>
#include <string>

#include "tbslab/errors.hpp"

namespace tbslab {

double proximity_statistic(const SamplingSet& s, const GridSpec& grid,
                           const ProximityFunction& phi) {
  const auto& idx = s.indices;
  if (idx.size() < 2) throw ContractViolation("proximity_statistic needs at least 2 samples");
  for (const auto i : idx) {
    if (i >= grid.cell_count()) throw ContractViolation("sample index out of range");
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      const double r = grid.distance(idx[a], idx[b]);
      if (const auto* ind = std::get_if<IndicatorProximity>(&phi)) {
        sum += r <= ind->r0 ? 1.0 : 0.0;
      } else {
        sum += std::get<KernelProximity>(phi).kernel(r);
      }
    }
  }
  const double m = static_cast<double>(idx.size());
  return 2.0 * sum / (m * (m - 1.0));
}

MIReport mutual_information(const Eigen::MatrixXd& covariance, double noise_var) {
  if (!(noise_var > 0.0)) throw ValidationError("mutual_information: noise variance must be > 0");
  const auto m = covariance.rows();
  if (m == 0 || covariance.cols() != m) {
    throw ValidationError("mutual_information: covariance must be square and nonempty");
  }
  const double gamma = 1.0 / noise_var;
  // I + gA = S (I + N) S with S = (I + gD)^(1/2), so the log-det splits into
  // the diagonal term plus logdet(I + N); N vanishes exactly when E does.
  MIReport r;
  Eigen::VectorXd inv_root(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const double dga = 1.0 + gamma * covariance(a, a);
    if (!(dga > 0.0)) {
      throw NumericalError("mutual_information: negative variance on the diagonal");
    }
    r.diag_term += 0.5 * std::log(dga);
    inv_root(a) = 1.0 / std::sqrt(dga);
  }
  Eigen::MatrixXd normalized(m, m);
  double trace_sq = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const double n_ab = a == b ? 0.0 : gamma * covariance(a, b) * inv_root(a) * inv_root(b);
      normalized(a, b) = n_ab;
      trace_sq += n_ab * n_ab;
    }
  }
  normalized.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> llt(normalized);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("mutual_information: I + A / noise_var is not positive definite");
  }
  double coupling = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) coupling += std::log(llt.matrixLLT()(i, i));
  r.exact = r.diag_term + coupling;
  r.penalty = 0.25 * trace_sq;
  r.approx = r.diag_term - r.penalty;
  r.residual = r.exact - r.approx;
  return r;
}

MIReport mutual_information(const Kernel& kernel, double noise_var, const SamplingSet& s,
                            const GridSpec& grid) {
  if (s.indices.empty()) throw ValidationError("mutual_information needs at least one sample");
  return mutual_information(
      covariance_block(kernel, grid, s.indices, s.indices, Execution::serial), noise_var);
}

namespace {

double evaluate(const SetStatistic& statistic, const SamplingSet& s, const GridSpec& grid) {
  if (const auto* p = std::get_if<ProximityStat>(&statistic)) {
    return proximity_statistic(s, grid, p->phi);
  }
  const auto& mi = std::get<MutualInfoStat>(statistic);
  return mutual_information(mi.kernel, mi.noise_var, s, grid).exact;
}

}  // namespace

StatisticEstimate expected_statistic(const SamplerConfig& mode, const EnvironmentMask& mask,
                                     const SetStatistic& statistic, std::size_t n_trials,
                                     std::uint64_t seed, Execution exec) {
  if (n_trials < 2) throw ValidationError("expected_statistic needs at least 2 trials");
  validate(mode, mask);
  std::vector<double> values(n_trials, std::nan(""));
  std::vector<std::uint8_t> stalled(n_trials, 0);
  for_each_index(exec, n_trials, [&](std::size_t t) {
    auto rng = trial_rng(seed, t, Substream::mask);
    try {
      const auto s = draw_sampling_set(mask, mode, rng);
      values[t] = evaluate(statistic, s, mask.grid());
    } catch (const StallError&) {
      stalled[t] = 1;
    }
  });

  StatisticEstimate est;
  double sum = 0.0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    if (stalled[t]) {
      ++est.stalls;
    } else {
      sum += values[t];
      ++est.trials;
    }
  }
  if (est.stalls * 10 > n_trials || est.trials < 2) {
    throw StallBudgetError("expected_statistic: " + std::to_string(est.stalls) + " of " +
                           std::to_string(n_trials) + " sampling sets stalled");
  }
  est.mean = sum / static_cast<double>(est.trials);
  double ss = 0.0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    if (!stalled[t]) ss += (values[t] - est.mean) * (values[t] - est.mean);
  }
  est.stderr_mean = std::sqrt(ss / static_cast<double>(est.trials - 1)) /
                    std::sqrt(static_cast<double>(est.trials));
  return est;
}

ExpectationComparison compare_estimates(const StatisticEstimate& a, const StatisticEstimate& b) {
  ExpectationComparison c{a, b, 0.0};
  const double diff = a.mean - b.mean;
  const double se = std::hypot(a.stderr_mean, b.stderr_mean);
  if (diff == 0.0) {
    c.z_score = 0.0;
  } else if (se == 0.0) {
    c.z_score = diff > 0 ? HUGE_VAL : -HUGE_VAL;
  } else {
    c.z_score = diff / se;
  }
  return c;
}

ExpectationComparison compare_distributions(const SamplerConfig& mode_a,
                                            const SamplerConfig& mode_b,
                                            const EnvironmentMask& mask,
                                            const SetStatistic& statistic,
                                            std::size_t n_trials, std::uint64_t seed,
                                            Execution exec) {
  const auto a = expected_statistic(mode_a, mask, statistic, n_trials, seed, exec);
  const auto b = expected_statistic(mode_b, mask, statistic, n_trials, seed, exec);
  return compare_estimates(a, b);
}

double paired_z(std::span<const std::size_t> ids_a, std::span<const double> a,
                std::span<const std::size_t> ids_b, std::span<const double> b) {
  std::vector<double> diffs;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ids_a.size() && j < ids_b.size()) {
    if (ids_a[i] < ids_b[j]) {
      ++i;
    } else if (ids_b[j] < ids_a[i]) {
      ++j;
    } else {
      diffs.push_back(a[i++] - b[j++]);
    }
  }
  if (diffs.size() < 2) throw ValidationError("paired_z needs at least 2 common trials");
  double mean = 0.0;
  for (const double d : diffs) mean += d;
  mean /= static_cast<double>(diffs.size());
  double ss = 0.0;
  for (const double d : diffs) ss += (d - mean) * (d - mean);
  const double se = std::sqrt(ss / static_cast<double>(diffs.size() - 1)) /
                    std::sqrt(static_cast<double>(diffs.size()));
  if (mean == 0.0) return 0.0;
  if (se == 0.0) return mean > 0 ? HUGE_VAL : -HUGE_VAL;
  return mean / se;
}

RiskDecomposition decompose_risk(const RiskTriple& risks) {
  if (!std::isfinite(risks.r_cr) || !std::isfinite(risks.r_cc) || !std::isfinite(risks.r_rr)) {
    throw ValidationError("decompose_risk: inputs must be finite");
  }
  RiskDecomposition d;
  d.mismatch = risks.r_cr - risks.r_cc;
  d.intrinsic = risks.r_cc - risks.r_rr;
  d.total = risks.r_cr - risks.r_rr;
  return d;
}

Eigen::MatrixXd synthetic_covariance(std::size_t m, double scale, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      a(i, j) = a(j, i) = scale * u(rng);
    }
  }
  return a;
}

std::vector<TaylorScalingPoint> taylor_residual_sweep(std::size_t m,
                                                      std::span<const double> scales,
                                                      std::uint64_t seed) {
  std::vector<TaylorScalingPoint> out;
  for (const double c : scales) {
    TaylorScalingPoint p{c, mutual_information(synthetic_covariance(m, c, seed), 1.0), 0.0};
    if (!out.empty() && out.back().report.residual != 0.0) {
      p.shrink = std::abs(p.report.residual) / std::abs(out.back().report.residual);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace tbslab
