// tbslab command-line front end.
//
// Every subcommand reads the same flat config (--config), applies the
// global overrides, validates everything, and only then computes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbslab/config.hpp"
#include "tbslab/diagnostics.hpp"
#include "tbslab/errors.hpp"
#include "tbslab/experiment.hpp"
#include "tbslab/grid_io.hpp"
#include "tbslab/metrics.hpp"
#include "tbslab/report_io.hpp"

namespace fs = std::filesystem;
using namespace tbslab;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> trials;
  std::vector<std::string> settings;
  bool quiet = false;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig cfg = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  for (const auto& kv : g.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    apply_setting(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.out_dir) cfg.out_dir = *g.out_dir;
  if (g.trials) cfg.trials = *g.trials;
  validate(cfg);
  return cfg;
}

class Reporter {
 public:
  explicit Reporter(bool quiet) : quiet_(quiet) {}
  void note(const std::string& msg) const {
    if (!quiet_) std::cerr << msg << '\n';
  }

 private:
  bool quiet_;
};

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  writer(out);
  if (!out) throw ValidationError("write failed for " + path.string());
}

SamplerConfig configured_sampler(const ExperimentConfig& cfg) { return cfg.sampler; }

EstimatorSpec configured_estimator(const ExperimentConfig& cfg) {
  switch (cfg.estimator_kind) {
    case EstimatorKind::idw: return EstimatorSpec::idw(cfg.estimator_power);
    case EstimatorKind::nearest: return EstimatorSpec::nearest();
    case EstimatorKind::gp_posterior:
    case EstimatorKind::fitted_gp: break;
  }
  return EstimatorSpec::gp(true_kernel(cfg), cfg.noise_var);
}

void write_fits(const ExperimentConfig& cfg, const FitPair& fits) {
  write_file(out_path(cfg, "fits.csv"), [&](std::ostream& out) {
    write_audit_header(out, cfg.seed);
    out << "label,train_mode,family,length_scale,noise_var,train_risk,stalls\n";
    auto row = [&](const char* label, const FittedParams& p) {
      out << label << ',' << to_string(p.train_mode) << ',' << to_string(p.kernel.family) << ','
          << format_real(p.kernel.length_scale) << ',' << format_real(p.noise_var) << ','
          << format_real(p.train_risk) << ',' << p.stalls << '\n';
    };
    row(kFitRandomLabel, fits.random);
    row(kFitTrajectoryLabel, fits.trajectory);
  });
}

// Runs one table-producing experiment; rows finished before an error are
// still written.
template <class Run>
FitPair run_table(const ExperimentConfig& cfg, const Reporter& rep, const std::string& file,
                  Run&& run) {
  const auto bed = make_testbed(cfg);
  ResultTable table;
  const auto path = out_path(cfg, file);
  try {
    const auto fits = run(bed, table);
    write_file(path, [&](std::ostream& out) { write_result_table(out, table, cfg.seed); });
    write_fits(cfg, fits);
    rep.note("wrote " + path.string());
    return fits;
  } catch (...) {
    write_file(path, [&](std::ostream& out) { write_result_table(out, table, cfg.seed); });
    rep.note("partial results written to " + path.string());
    throw;
  }
}

void print_decomposition(const RiskTriple& r, std::ostream& out) {
  const auto d = decompose_risk(r);
  out << "mismatch,intrinsic,total\n"
      << format_real(d.mismatch) << ',' << format_real(d.intrinsic) << ','
      << format_real(d.total) << '\n';
}

void cmd_gen_mask(const ExperimentConfig& cfg, const Reporter& rep, const std::string& output) {
  auto gen = cfg;
  if (gen.mask_source == MaskSource::free) gen.mask_source = MaskSource::generated;
  const auto mask = make_mask(gen);
  const auto path = output.empty()
                        ? out_path(cfg, cfg.mask_format == MaskFormat::pbm ? "mask.pbm" : "mask.csv")
                        : fs::path(output);
  save_mask(path, mask, cfg.mask_format);
  rep.note("wrote " + path.string());
}

void cmd_gen_field(const ExperimentConfig& cfg, const Reporter& rep, std::size_t trial) {
  const auto bed = make_testbed(cfg);
  auto rng = trial_rng(cfg.seed, trial, Substream::field);
  const auto field = bed.simulator->sample(rng);
  const auto path = out_path(cfg, "field.csv");
  write_file(path, [&](std::ostream& out) { write_csv_field(out, field); });
  emit_heatmap(field, out_path(cfg, "field.pgm"));
  rep.note("wrote " + path.string() + " (jitter " + format_real(bed.simulator->jitter()) + ")");
}

void cmd_sample(const ExperimentConfig& cfg, const Reporter& rep, std::size_t sets) {
  const auto mask = make_mask(cfg);
  std::vector<SamplingSet> drawn;
  std::size_t stalls = 0;
  for (std::size_t t = 0; t < sets; ++t) {
    auto rng = trial_rng(cfg.seed, t, Substream::mask);
    try {
      drawn.push_back(draw_sampling_set(mask, configured_sampler(cfg), rng));
    } catch (const StallError& e) {
      ++stalls;
      rep.note(std::string("set ") + std::to_string(t) + ": " + e.what());
    }
  }
  const auto path = out_path(cfg, "samples.csv");
  write_file(path, [&](std::ostream& out) { write_sampling_sets(out, drawn, cfg.seed); });
  rep.note("wrote " + path.string());
  if (stalls * 10 > sets) {
    throw StallBudgetError(std::to_string(stalls) + " of " + std::to_string(sets) +
                           " sampling sets stalled");
  }
}

void cmd_reconstruct(const ExperimentConfig& cfg, const Reporter& rep,
                     const std::string& field_path, const std::string& field_format) {
  const auto bed = make_testbed(cfg);
  auto draw = draw_trial(bed, configured_sampler(cfg), cfg.seed, 0);
  if (!draw) throw StallBudgetError("the sampler stalled on the only draw");
  if (!field_path.empty()) {
    draw->truth = load_dense_map(field_path, parse_dense_format(field_format), bed.grid());
    auto noise = trial_rng(cfg.seed, 0, Substream::noise);
    draw->obs = observe(draw->truth, draw->obs.source, cfg.noise_var, noise);
  }
  const auto spec = configured_estimator(cfg);
  const auto estimate = reconstruct(spec, draw->obs, bed.grid());
  write_file(out_path(cfg, "estimate.csv"),
             [&](std::ostream& out) { write_csv_field(out, estimate); });
  emit_heatmap(estimate, out_path(cfg, "estimate.pgm"), &draw->obs.source);
  emit_heatmap(draw->truth, out_path(cfg, "truth.pgm"));

  const auto e = mse(estimate, draw->truth, bed.mask, cfg.metrics);
  const auto path = out_path(cfg, "reconstruct_metrics.csv");
  write_file(path, [&](std::ostream& out) {
    write_audit_header(out, cfg.seed);
    out << "estimator,mse,rmse,psnr,ssim\n";
    const double ssim_v = bed.grid().width() >= cfg.metrics.ssim_window &&
                                  bed.grid().height() >= cfg.metrics.ssim_window
                              ? ssim(estimate, draw->truth, cfg.metrics)
                              : std::nan("");
    out << spec.name() << ',' << format_real(e) << ',' << format_real(std::sqrt(e)) << ','
        << format_real(psnr_from_rmse(std::sqrt(e), cfg.metrics.dynamic_range)) << ','
        << format_real(ssim_v) << '\n';
  });
  rep.note("wrote " + path.string());
}

void cmd_diagnose(const ExperimentConfig& cfg, const Reporter& rep, std::size_t sets) {
  const auto mask = make_mask(cfg);
  const auto mode = configured_sampler(cfg);
  const auto kernel = true_kernel(cfg);
  const double r0 = cfg.diag_r0 * cfg.cell_size;

  std::vector<MIReport> reports;
  for (std::size_t t = 0; t < sets; ++t) {
    auto rng = trial_rng(cfg.seed, t, Substream::mask);
    try {
      const auto s = draw_sampling_set(mask, mode, rng);
      reports.push_back(mutual_information(kernel, cfg.noise_var, s, mask.grid()));
    } catch (const StallError& e) {
      rep.note(std::string("set ") + std::to_string(t) + ": " + e.what());
    }
  }
  write_file(out_path(cfg, "mi_reports.csv"),
             [&](std::ostream& out) { write_mi_reports(out, reports, cfg.seed); });

  const auto label = std::string(to_string(mode.mode));
  std::vector<DiagnosticRow> rows;
  rows.push_back({label, "proximity_indicator", cfg.diag_r0,
                  expected_statistic(mode, mask, ProximityStat{IndicatorProximity{r0}},
                                     cfg.trials, cfg.seed)});
  rows.push_back({label, "mi_" + std::string(to_string(kernel.family)) + "_nats",
                  cfg.kernel_lambda,
                  expected_statistic(mode, mask, MutualInfoStat{kernel, cfg.noise_var},
                                     cfg.trials, cfg.seed)});
  const auto path = out_path(cfg, "diagnose.csv");
  write_file(path, [&](std::ostream& out) { write_diagnostics(out, rows, cfg.seed); });
  rep.note("wrote " + path.string());
}

void cmd_info_suite(const ExperimentConfig& cfg, const Reporter& rep) {
  const auto mask = make_mask(cfg);
  const auto result = run_info_suite(cfg, mask);
  write_file(out_path(cfg, "info_suite.csv"),
             [&](std::ostream& out) { write_diagnostics(out, result.rows, cfg.seed); });
  const auto path = out_path(cfg, "info_checks.csv");
  write_file(path, [&](std::ostream& out) { write_checks(out, result.checks, cfg.seed); });
  for (const auto& c : result.checks) {
    rep.note(c.check + ": " + std::string(to_string(c.status)) + " (" + format_real(c.value) +
             " vs " + format_real(c.threshold) + ")");
  }
  rep.note("wrote " + path.string());
}

void cmd_cross_eval(const ExperimentConfig& cfg, const Reporter& rep, bool decompose) {
  CrossEvalOptions options;
  options.heatmap_dir = out_path(cfg, "heatmaps");
  ResultTable table;
  const auto bed = make_testbed(cfg);
  const auto path = out_path(cfg, "cross_eval.csv");
  try {
    const auto fits = run_cross_eval(cfg, bed, table, nullptr, options);
    write_file(path, [&](std::ostream& out) { write_result_table(out, table, cfg.seed); });
    write_fits(cfg, fits);
  } catch (...) {
    write_file(path, [&](std::ostream& out) { write_result_table(out, table, cfg.seed); });
    rep.note("partial results written to " + path.string());
    throw;
  }
  rep.note("wrote " + path.string());
  if (decompose) {
    const RiskTriple r{table.at("random", "st_tbs", kFitRandomLabel).report.mean_mse,
                       table.at("st_tbs", "st_tbs", kFitTrajectoryLabel).report.mean_mse,
                       table.at("random", "random", kFitRandomLabel).report.mean_mse};
    write_file(out_path(cfg, "decompose.csv"), [&](std::ostream& out) {
      write_audit_header(out, cfg.seed);
      print_decomposition(r, out);
    });
    print_decomposition(r, std::cout);
  }
}

void run_experiment(const ExperimentConfig& cfg, const Reporter& rep) {
  const auto& e = cfg.experiment;
  if (e == "cross_eval" || e == "decompose") {
    cmd_cross_eval(cfg, rep, e == "decompose");
  } else if (e == "info_suite") {
    cmd_info_suite(cfg, rep);
  } else if (e == "alpha_sweep") {
    run_table(cfg, rep, "alpha_sweep.csv",
              [&](const Testbed& bed, ResultTable& t) { return run_alpha_sweep(cfg, bed, t); });
  } else if (e == "ell_sweep") {
    run_table(cfg, rep, "ell_sweep.csv",
              [&](const Testbed& bed, ResultTable& t) { return run_ell_sweep(cfg, bed, t); });
  } else {
    throw ValidationError("config key 'experiment' is not set");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-distribution experiments on Gaussian random field radio maps"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--seed", g.seed, "master seed override");
  app.add_option("--out", g.out_dir, "output directory override");
  app.add_option("--trials", g.trials, "trial count override");
  app.add_option("--set", g.settings, "extra key=value setting (repeatable)");
  app.add_flag("--quiet,-q", g.quiet, "suppress progress messages");

  std::string mask_output;
  auto* gen_mask = app.add_subcommand("gen-mask", "generate a building mask");
  gen_mask->add_option("-o,--output", mask_output, "mask file (default <out>/mask.csv|pbm)");

  std::size_t field_trial = 0;
  auto* gen_field = app.add_subcommand("gen-field", "simulate one field");
  gen_field->add_option("--trial", field_trial, "trial index of the field stream");

  std::size_t sets = 1;
  auto* sample = app.add_subcommand("sample", "draw sampling sets from sampler.mode");
  sample->add_option("--sets", sets, "number of sets")->check(CLI::PositiveNumber);

  std::string field_path;
  std::string field_format = "csvfloat";
  auto* recon = app.add_subcommand("reconstruct", "reconstruct one draw with estimator.kind");
  recon->add_option("--field", field_path, "ground-truth map instead of a simulated field");
  recon->add_option("--field-format", field_format, "csvfloat or pgm16");

  std::size_t diag_sets = 10;
  auto* diagnose = app.add_subcommand("diagnose", "proximity and information of sampling sets");
  diagnose->add_option("--sets", diag_sets, "sets listed in mi_reports.csv");

  auto* cross = app.add_subcommand("cross-eval", "train/test cross evaluation");
  auto* info = app.add_subcommand("info-suite", "sampling-set diagnostics with checks");
  auto* alpha = app.add_subcommand("alpha-sweep", "risk over the hybrid path ratio");
  auto* ell = app.add_subcommand("ell-sweep", "risk over trigger interval");
  auto* run = app.add_subcommand("run", "run the experiment named in the config");

  double r_cr = 0, r_cc = 0, r_rr = 0;
  auto* decompose = app.add_subcommand("decompose", "split excess risk");
  decompose->add_option("r_cr", r_cr, "trajectory-tested risk, random-fitted")->required();
  decompose->add_option("r_cc", r_cc, "trajectory-tested risk, trajectory-fitted")->required();
  decompose->add_option("r_rr", r_rr, "random-tested risk, random-fitted")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const Reporter rep(g.quiet);
  try {
    if (decompose->parsed()) {
      print_decomposition({r_cr, r_cc, r_rr}, std::cout);
      return 0;
    }
    const auto cfg = resolve_config(g);
    if (gen_mask->parsed()) cmd_gen_mask(cfg, rep, mask_output);
    else if (gen_field->parsed()) cmd_gen_field(cfg, rep, field_trial);
    else if (sample->parsed()) cmd_sample(cfg, rep, sets);
    else if (recon->parsed()) cmd_reconstruct(cfg, rep, field_path, field_format);
    else if (diagnose->parsed()) cmd_diagnose(cfg, rep, diag_sets);
    else if (cross->parsed()) cmd_cross_eval(cfg, rep, false);
    else if (info->parsed()) cmd_info_suite(cfg, rep);
    else if (alpha->parsed()) {
      run_table(cfg, rep, "alpha_sweep.csv",
                [&](const Testbed& bed, ResultTable& t) { return run_alpha_sweep(cfg, bed, t); });
    } else if (ell->parsed()) {
      run_table(cfg, rep, "ell_sweep.csv",
                [&](const Testbed& bed, ResultTable& t) { return run_ell_sweep(cfg, bed, t); });
    } else if (run->parsed()) {
      run_experiment(cfg, rep);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
