// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Oracles below are computed here, independently of the
// library code paths they check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tbslab/config.hpp"
#include "tbslab/diagnostics.hpp"
#include "tbslab/errors.hpp"
#include "tbslab/experiment.hpp"
#include "tbslab/metrics.hpp"
#include "tbslab/report_io.hpp"

using namespace tbslab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double unpaired_z(double mean_a, double se_a, double mean_b, double se_b) {
  const double se = std::sqrt(se_a * se_a + se_b * se_b);
  if (mean_a == mean_b) return 0.0;
  return se > 0.0 ? (mean_a - mean_b) / se : (mean_a > mean_b ? HUGE_VAL : -HUGE_VAL);
}

// Fraction of unordered pairs of cells on an all-free w x h grid whose
// centers are within r0, counted by displacement class.
double pair_fraction_oracle(std::size_t w, std::size_t h, double r0) {
  double close = 0.0;
  for (std::size_t dr = 0; dr < h; ++dr) {
    for (std::size_t dc = 0; dc < w; ++dc) {
      if (dr == 0 && dc == 0) continue;
      if (double(dr * dr + dc * dc) > r0 * r0) continue;
      // ordered displacement (dr, +-dc); each unordered pair counted once
      const double count = double(h - dr) * double(w - dc);
      close += (dr > 0 && dc > 0) ? 2.0 * count : count;
    }
  }
  const double n = double(w * h);
  return close / (n * (n - 1.0) / 2.0);
}

// 1/2 logdet(I + A / s2) via partial-pivot LU and the second-order
// expansion written out directly.
struct MiOracle {
  double exact, approx;
};
MiOracle mi_oracle(const Eigen::MatrixXd& a, double s2) {
  const auto m = a.rows();
  const Eigen::MatrixXd i_plus = Eigen::MatrixXd::Identity(m, m) + a / s2;
  const double exact = 0.5 * std::log(i_plus.partialPivLu().determinant());
  double diag = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) diag += 0.5 * std::log(1.0 + a(k, k) / s2);
  double pen = 0.0;
  for (Eigen::Index p = 0; p < m; ++p) {
    for (Eigen::Index q = 0; q < m; ++q) {
      if (p == q) continue;
      const double n = (a(p, q) / s2) / std::sqrt((1.0 + a(p, p) / s2) * (1.0 + a(q, q) / s2));
      pen += 0.25 * n * n;
    }
  }
  return {exact, diag - pen};
}

// tr(K) - tr(C (A + s2 I)^-1 C^T) over all cells, from the kernel directly.
double posterior_trace_oracle(const Kernel& k, double s2, const GridSpec& g,
                              const std::vector<std::size_t>& s) {
  const auto d = static_cast<Eigen::Index>(g.cell_count());
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd c(d, m), a(m, m);
  auto dist = [&](std::size_t p, std::size_t q) {
    const auto cp = g.coords(p), cq = g.coords(q);
    const double dr = (double(cp.row) - double(cq.row)) * g.cell_size();
    const double dc = (double(cp.col) - double(cq.col)) * g.cell_size();
    return std::sqrt(dr * dr + dc * dc);
  };
  auto kern = [&](double r) {
    return k.family == KernelFamily::squared_exponential
               ? k.amplitude * std::exp(-r * r / (2.0 * k.length_scale * k.length_scale))
               : k.amplitude * std::exp(-r / k.length_scale);
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) c(i, j) = kern(dist(std::size_t(i), s[std::size_t(j)]));
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = kern(dist(s[std::size_t(i)], s[std::size_t(j)]));
  }
  a.diagonal().array() += s2;
  const Eigen::MatrixXd w = a.ldlt().solve(c.transpose());
  return double(d) * k.amplitude - (c.array() * w.transpose().array()).sum();
}

class Suite {
 public:
  void run(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures_;
    std::printf("%s  #%-2d %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

// Shared default-scale state for criteria 7-10.
struct DefaultRun {
  ExperimentConfig cfg;
  std::optional<Testbed> bed;
  std::optional<FitPair> fits;

  void ensure() {
    if (bed) return;
    bed = make_testbed(cfg);
    fits = fit_pair(cfg, *bed);
    std::printf("      fitted theta_R: exp lambda=%g noise=%g | theta_C: exp lambda=%g noise=%g\n",
                fits->random.kernel.length_scale, fits->random.noise_var,
                fits->trajectory.kernel.length_scale, fits->trajectory.noise_var);
  }
};

const RiskReport& report(const ResultTable& t, const char* train, const std::string& test,
                         const char* est) {
  return t.at(train, test, est).report;
}

}  // namespace

int main() {
  Suite suite;
  DefaultRun defaults;
  std::printf("tbslab %s acceptance suite\n", kToolVersion);

  suite.run(1, "risk decomposition arithmetic", [] {
    Outcome o;
    struct Case { RiskTriple in; double mis, intr, tot; };
    const Case cases[] = {{{0.0775, 0.0570, 0.0305}, 0.0205, 0.0265, 0.0470},
                          {{0.2632, 0.0571, 0.0391}, 0.2061, 0.0180, 0.2241}};
    for (const auto& c : cases) {
      const auto d = decompose_risk(c.in);
      const double err = std::max({std::abs(d.mismatch - c.mis), std::abs(d.intrinsic - c.intr),
                                   std::abs(d.total - c.tot)});
      o.require(err <= 1e-12, "max error " + fmt("%.3g", err));
      o.note("(" + fmt("%.4f", d.mismatch) + ", " + fmt("%.4f", d.intrinsic) + ", " +
             fmt("%.4f", d.total) + ")");
    }
    return o;
  });

  suite.run(2, "robustness gain", [] {
    Outcome o;
    const double a = robustness_gain(0.2632, 0.0571);
    const double b = robustness_gain(0.2632, 0.0545);
    o.require(std::abs(a - 78.31) <= 0.005, "78.31 vs " + fmt("%.4f", a));
    o.require(std::abs(b - 79.29) <= 0.005, "79.29 vs " + fmt("%.4f", b));
    o.note(fmt("%.4f%%", a) + ", " + fmt("%.4f%%", b));
    return o;
  });

  suite.run(3, "proximity: st_tbs clusters more than random", [] {
    Outcome o;
    const auto mask = EnvironmentMask::all_free(GridSpec(64, 64));
    const auto t0 = Clock::now();
    const auto cmp = compare_distributions(SamplerConfig::st_tbs(50), SamplerConfig::random(50),
                                           mask, ProximityStat{IndicatorProximity{5.0}}, 1000,
                                           derive_seed(1, "acceptance.proximity"));
    const double elapsed = seconds_since(t0);
    o.require(cmp.z_score >= 3.0, "z = " + fmt("%.2f", cmp.z_score));
    const double oracle = pair_fraction_oracle(64, 64, 5.0);
    const double dev = std::abs(cmp.b.mean - oracle) / cmp.b.stderr_mean;
    o.require(dev <= 3.0, "random vs oracle " + fmt("%.2f", dev) + " stderr");
    o.require(elapsed < 60.0, "runtime " + fmt("%.1fs", elapsed));
    o.note("E_st=" + fmt("%.5f", cmp.a.mean) + " E_rand=" + fmt("%.5f", cmp.b.mean) +
           " oracle=" + fmt("%.5f", oracle) + " z=" + fmt("%.1f", cmp.z_score) +
           " |rand-oracle|/se=" + fmt("%.2f", dev));
    return o;
  });

  suite.run(4, "information: st_tbs carries less than random (both kernels)", [] {
    Outcome o;
    const GridSpec g(64, 64);
    const auto mask = EnvironmentMask::all_free(g);
    for (const auto fam : {KernelFamily::squared_exponential, KernelFamily::exponential}) {
      const Kernel k{fam, 1.0, 8.0};
      // spot-check the library against the LU oracle on a few sets
      Rng rng(derive_seed(4, std::uint64_t(fam)));
      for (int rep = 0; rep < 5; ++rep) {
        const auto s = trajectory_sample(mask, SamplerConfig::st_tbs(50), rng);
        const auto lib = mutual_information(k, 0.01, s, g);
        const auto ref = mi_oracle(covariance_block(k, g, s.indices, s.indices), 0.01);
        o.require(std::abs(lib.exact - ref.exact) <= 1e-8 * std::abs(ref.exact),
                  "library MI disagrees with LU oracle");
      }
      const auto cmp = compare_distributions(SamplerConfig::st_tbs(50), SamplerConfig::random(50),
                                             mask, MutualInfoStat{k, 0.01}, 1000,
                                             derive_seed(1, "acceptance.mi"));
      o.require(cmp.z_score <= -3.0, std::string(to_string(fam)) + " z = " + fmt("%.2f", cmp.z_score));
      o.note(std::string(to_string(fam)) + ": E_st=" + fmt("%.3f", cmp.a.mean) + " E_rand=" +
             fmt("%.3f", cmp.b.mean) + " z=" + fmt("%.1f", cmp.z_score));
    }
    return o;
  });

  suite.run(5, "second-order expansion residual scaling", [] {
    Outcome o;
    const double scales[] = {0.2, 0.1, 0.05, 0.025};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto sweep = taylor_residual_sweep(5, scales, seed);
      for (std::size_t i = 0; i < sweep.size(); ++i) {
        const auto ref = mi_oracle(synthetic_covariance(5, scales[i], seed), 1.0);
        const double ref_res = ref.exact - ref.approx;
        o.require(std::abs(sweep[i].report.residual - ref_res) <= 1e-12,
                  "residual disagrees with oracle at seed " + std::to_string(seed));
        if (i > 0) {
          const double shrink = std::abs(sweep[i].report.residual) /
                                std::abs(sweep[i - 1].report.residual);
          worst = std::max(worst, shrink);
          o.require(shrink <= 0.3, "shrink " + fmt("%.3f", shrink) + " at seed " +
                                       std::to_string(seed));
        }
      }
      const auto zero = mutual_information(synthetic_covariance(5, 0.0, seed), 1.0);
      o.require(zero.residual == 0.0, "residual with E = 0 is " + fmt("%.3g", zero.residual));
    }
    o.note("20 patterns, worst shrink per halving " + fmt("%.3f", worst) + ", E=0 residual exactly 0");
    return o;
  });

  suite.run(6, "Bayes self-consistency on 20 fixed sets", [] {
    Outcome o;
    const GridSpec g(16, 16);
    const auto mask = EnvironmentMask::all_free(g);
    const Kernel k{KernelFamily::squared_exponential, 1.0, 2.0};
    const double s2 = 0.01;
    const FieldSimulator sim(k, g);
    double worst = 0.0;
    for (std::size_t set_id = 0; set_id < 20; ++set_id) {
      Rng mrng(derive_seed(6, set_id));
      const auto s = set_id % 2 ? trajectory_sample(mask, SamplerConfig::st_tbs(30), mrng)
                                : random_sample(mask, 30, mrng);
      const double oracle = posterior_trace_oracle(k, s2, g, s.indices) / 256.0;
      const auto lib = gp_posterior(k, s2, Observation{std::vector<double>(30, 0.0), s2, s}, g);
      o.require(std::abs(lib.posterior_trace / 256.0 - oracle) <= 1e-9,
                "library posterior trace disagrees with oracle");
      Rng frng(derive_seed(66, set_id));
      double total = 0.0;
      for (int d = 0; d < 500; ++d) {
        const auto truth = sim.sample(frng);
        const auto obs = observe(truth, s, s2, frng);
        total += mse(gp_posterior(k, s2, obs, g, false).estimate, truth, mask);
      }
      const double rel = std::abs(total / 500.0 - oracle) / oracle;
      worst = std::max(worst, rel);
      o.require(rel <= 0.05, "set " + std::to_string(set_id) + " off by " + fmt("%.3f", rel));
    }
    o.note("16x16 SE lambda=2, m=30, 10 random + 10 st_tbs sets, worst relative gap " +
           fmt("%.4f", worst));
    return o;
  });

  ResultTable cross;
  suite.run(7, "cross-eval: random fit degrades on st_tbs, each fit best on its own mode", [&] {
    Outcome o;
    const auto t0 = Clock::now();
    defaults.ensure();
    run_cross_eval(defaults.cfg, *defaults.bed, cross, &*defaults.fits);
    const double elapsed = seconds_since(t0);
    const auto& rr = report(cross, "random", "random", kFitRandomLabel);
    const auto& rc = report(cross, "random", "st_tbs", kFitRandomLabel);
    const auto& cc = report(cross, "st_tbs", "st_tbs", kFitTrajectoryLabel);
    const auto& cr = report(cross, "st_tbs", "random", kFitTrajectoryLabel);
    const double z = unpaired_z(rc.mean_mse, rc.stderr_mse, rr.mean_mse, rr.stderr_mse);
    o.require(z >= 3.0, "degradation z = " + fmt("%.2f", z));
    o.require(cc.mean_mse <= rc.mean_mse + 2.0 * rc.stderr_mse, "theta_C not optimal under st_tbs");
    o.require(rr.mean_mse <= cr.mean_mse + 2.0 * cr.stderr_mse, "theta_R not optimal under random");
    o.require(elapsed < 600.0, "runtime " + fmt("%.1fs", elapsed));
    o.note("R_R(thR)=" + fmt("%.4f", rr.mean_mse) + " R_C(thR)=" + fmt("%.4f", rc.mean_mse) +
           " R_C(thC)=" + fmt("%.4f", cc.mean_mse) + " R_R(thC)=" + fmt("%.4f", cr.mean_mse) +
           " z=" + fmt("%.1f", z) + " G_rob(thC|st_tbs)=" +
           fmt("%.2f%%", cross.at("st_tbs", "st_tbs", kFitTrajectoryLabel).g_rob));
    return o;
  });

  suite.run(8, "oracle risk higher under st_tbs than random", [&] {
    Outcome o;
    if (cross.rows.empty()) {
      o.require(false, "cross-eval table unavailable");
      return o;
    }
    const auto& r = report(cross, "none", "random", kOracleLabel);
    const auto& c = report(cross, "none", "st_tbs", kOracleLabel);
    const double z = unpaired_z(c.mean_mse, c.stderr_mse, r.mean_mse, r.stderr_mse);
    o.require(z >= 3.0, "z = " + fmt("%.2f", z));
    const auto d = decompose_risk({report(cross, "random", "st_tbs", kFitRandomLabel).mean_mse,
                                   report(cross, "st_tbs", "st_tbs", kFitTrajectoryLabel).mean_mse,
                                   report(cross, "random", "random", kFitRandomLabel).mean_mse});
    o.note("oracle R_random=" + fmt("%.4f", r.mean_mse) + " R_st=" + fmt("%.4f", c.mean_mse) +
           " z=" + fmt("%.1f", z) + "; fitted split mismatch=" + fmt("%.4f", d.mismatch) +
           " intrinsic=" + fmt("%.4f", d.intrinsic));
    return o;
  });

  suite.run(9, "risk rises with the path ratio alpha", [&] {
    Outcome o;
    defaults.ensure();
    ResultTable t;
    run_alpha_sweep(defaults.cfg, *defaults.bed, t, &*defaults.fits);
    std::vector<const RiskReport*> oracle;
    for (const double a : kAlphaGrid) oracle.push_back(&report(t, "none", alpha_label(a), kOracleLabel));
    int inversions = 0;
    std::string curve;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      curve += (i ? " " : "") + fmt("%.4f", oracle[i]->mean_mse);
      if (i == 0) continue;
      const double drop = oracle[i - 1]->mean_mse - oracle[i]->mean_mse;
      if (drop > 0.0) {
        ++inversions;
        const double se = std::hypot(oracle[i - 1]->stderr_mse, oracle[i]->stderr_mse);
        o.require(drop <= se, "inversion beyond 1 stderr at alpha=" + fmt("%g", kAlphaGrid[i]));
      }
    }
    o.require(inversions <= 1, std::to_string(inversions) + " inversions");
    const auto& r1 = report(t, "random", alpha_label(1.0), kFitRandomLabel);
    const auto& c1 = report(t, "st_tbs", alpha_label(1.0), kFitTrajectoryLabel);
    const double z = paired_z(r1.trial_ids, r1.trial_mse, c1.trial_ids, c1.trial_mse);
    o.require(z >= 2.0, "theta_C vs theta_R at alpha=1: paired z = " + fmt("%.2f", z));
    const auto& r02 = report(t, "random", alpha_label(0.2), kFitRandomLabel);
    const auto& c02 = report(t, "st_tbs", alpha_label(0.2), kFitTrajectoryLabel);
    o.note("oracle " + curve + "; alpha=1 thR=" + fmt("%.4f", r1.mean_mse) + " thC=" +
           fmt("%.4f", c1.mean_mse) + " paired z=" + fmt("%.1f", z) + "; alpha=0.2 thR=" +
           fmt("%.4f", r02.mean_mse) + " thC=" + fmt("%.4f", c02.mean_mse));
    return o;
  });

  suite.run(10, "risk ordering over trigger interval", [&] {
    Outcome o;
    defaults.ensure();
    ResultTable t;
    run_ell_sweep(defaults.cfg, *defaults.bed, t, &*defaults.fits);
    const std::string order[] = {ell_label(5), ell_label(10), "st_tbs", "random"};
    std::string curve;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& hi = report(t, "none", order[i], kOracleLabel);
      curve += (i ? " >= " : "") + order[i] + ":" + fmt("%.4f", hi.mean_mse);
      if (i == 3) break;
      const auto& lo = report(t, "none", order[i + 1], kOracleLabel);
      const double se = std::hypot(hi.stderr_mse, lo.stderr_mse);
      o.require(hi.mean_mse - lo.mean_mse >= -se, order[i] + " below " + order[i + 1]);
    }
    const auto deg = [&](const char* train, const char* est) {
      return report(t, train, ell_label(5), est).mean_mse - report(t, train, "random", est).mean_mse;
    };
    o.note(curve + "; degradation at ell=5 thR=" + fmt("%.4f", deg("random", kFitRandomLabel)) +
           " thC=" + fmt("%.4f", deg("st_tbs", kFitTrajectoryLabel)));
    return o;
  });

  suite.run(11, "trajectory sampler structure (1000 sets, 5 masks)", [] {
    Outcome o;
    std::vector<EnvironmentMask> masks{EnvironmentMask::all_free(GridSpec(64, 64)),
                                       EnvironmentMask::all_free(GridSpec(32, 48, 2.0))};
    for (std::uint64_t k = 0; k < 3; ++k) {
      Rng rng(derive_seed(11, k));
      masks.push_back(generate_mask(GridSpec(64, 64), {10, 4, 12}, rng));
    }
    const std::vector<SamplerConfig> modes{SamplerConfig::st_tbs(50), SamplerConfig::ell_tbs(50, 5),
                                           SamplerConfig::ell_tbs(50, 10), SamplerConfig::random(50),
                                           SamplerConfig::hybrid(50, 0.5)};
    std::size_t sets = 0, stalls = 0, gaps = 0, deferred = 0, bad = 0;
    auto fail = [&](const std::string& what) {
      if (bad++ < 5) o.require(false, what);
    };
    for (std::size_t mi = 0; mi < masks.size(); ++mi) {
      const auto& mask = masks[mi];
      const auto& g = mask.grid();
      const bool all_free = mask.free_cells().size() == g.cell_count();
      for (std::size_t t = 0; t < 200; ++t) {
        const auto& mode = modes[t % modes.size()];
        const auto seed = derive_seed(derive_seed(111, mi), t);
        Rng rng(seed);
        SamplingSet s{g};
        try {
          s = draw_sampling_set(mask, mode, rng);
        } catch (const StallError&) {
          ++stalls;
          continue;
        }
        ++sets;
        Rng again(seed);
        const auto s2 = draw_sampling_set(mask, mode, again);
        if (s2.indices != s.indices || s2.trajectory != s.trajectory) fail("nondeterministic set");
        if (s.indices.size() != mode.m) fail("wrong set size");
        std::set<std::size_t> uniq(s.indices.begin(), s.indices.end());
        if (uniq.size() != s.indices.size()) fail("duplicate sample");
        for (const auto i : s.indices) {
          if (!mask.is_free(i)) fail("sample on a building");
        }
        for (std::size_t k = 0; k < s.trajectory.size(); ++k) {
          if (!mask.is_free(s.trajectory[k])) fail("trajectory enters a building");
          if (k == 0) continue;
          const auto a = g.coords(s.trajectory[k - 1]), b = g.coords(s.trajectory[k]);
          const auto manhattan = (a.row > b.row ? a.row - b.row : b.row - a.row) +
                                 (a.col > b.col ? a.col - b.col : b.col - a.col);
          if (manhattan != 1) fail("trajectory jump");
        }
        for (std::size_t k = 0; k < s.trigger_steps.size(); ++k) {
          if (s.trajectory[s.trigger_steps[k]] != s.indices[k]) fail("trigger step mismatch");
        }
        if (mode.mode != SamplingMode::ell_tbs) continue;
        const std::size_t ell = mode.ell;
        std::size_t prev = 0;
        std::set<std::size_t> taken;
        for (std::size_t k = 0; k < s.trigger_steps.size(); ++k) {
          const auto step = s.trigger_steps[k];
          // sampled at the first step >= prev + ell whose cell is new
          std::size_t expect = prev + ell;
          while (expect < s.trajectory.size() && taken.count(s.trajectory[expect])) ++expect;
          if (step != expect) fail("ell_tbs trigger not at first new cell after ell steps");
          const bool on_time = step == prev + ell;
          if (k > 0) {
            ++gaps;
            const double euclid = g.distance(s.indices[k - 1], s.indices[k]);
            if (on_time) {
              if (euclid > double(ell) * g.cell_size() + 1e-9) fail("Euclidean gap exceeds ell");
            } else {
              ++deferred;
              if (euclid > double(step - prev) * g.cell_size() + 1e-9) fail("gap exceeds path length");
            }
            if (all_free && on_time && step - prev != ell) fail("spacing differs from ell");
          }
          taken.insert(s.indices[k]);
          prev = step;
        }
      }
    }
    o.require(sets + stalls == 1000, "set count");
    o.require(bad == 0, std::to_string(bad) + " violations");
    o.note(std::to_string(sets) + " sets, " + std::to_string(stalls) + " stalls, " +
           std::to_string(gaps) + " ell_tbs gaps of which " + std::to_string(deferred) +
           " deferred past ell by revisits");
    return o;
  });

  suite.run(12, "metrics and byte-identical CSV output", [] {
    Outcome o;
    o.require(psnr_from_rmse(0.1) == 20.0, "psnr(0.1) = " + fmt("%.17g", psnr_from_rmse(0.1)));
    const GridSpec g(32, 32);
    Rng rng(12);
    const auto x = sample_field(Kernel{}, g, rng);
    const double s = ssim(x, x);
    o.require(std::abs(s - 1.0) <= 1e-9, "ssim(x,x) = " + fmt("%.17g", s));
    const auto mask = EnvironmentMask::all_free(g);
    auto shifted = x;
    for (std::size_t i = 0; i < shifted.values.size(); ++i) shifted.values[i] += i % 2 ? 0.1 : -0.1;
    o.require(rmse(x, x, mask) == 0.0, "rmse(x,x) != 0");
    o.require(std::abs(rmse(shifted, x, mask) - 0.1) <= 1e-12, "rmse of +-0.1 shift");
    o.require(rmse(shifted, x, mask) == rmse(x, shifted, mask), "rmse asymmetric");

    ExperimentConfig cfg;
    cfg.grid_width = cfg.grid_height = 24;
    cfg.kernel_lambda = 4;
    cfg.sampler.m = 20;
    cfg.fit_n_train = 20;
    cfg.trials = 10;
    cfg.seed = 2024;
    auto once = [&] {
      const auto bed = make_testbed(cfg);
      ResultTable t;
      run_cross_eval(cfg, bed, t);
      const auto info = run_info_suite(cfg, bed.mask);
      std::ostringstream out;
      write_result_table(out, t, cfg.seed);
      write_diagnostics(out, info.rows, cfg.seed);
      write_checks(out, info.checks, cfg.seed);
      return out.str();
    };
    const auto a = once();
    const auto b = once();
    o.require(a == b, "CSV output differs between runs");
    o.note("psnr(0.1)=20 dB, ssim(x,x)-1=" + fmt("%.1e", s - 1.0) + ", " +
           std::to_string(a.size()) + " CSV bytes identical across runs");
    return o;
  });

  std::printf("%d criteria failed\n", suite.failures());
  return suite.failures() == 0 ? 0 : 1;
}
