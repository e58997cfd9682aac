#include "tbslab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <locale>
#include <map>
#include <sstream>

#include "tbslab/errors.hpp"

namespace tbslab {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw ValidationError("config key '" + std::string(key) + "': '" + std::string(value) +
                        "' is not " + std::string(what));
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view v) {
  return static_cast<std::size_t>(to_u64(key, v));
}

double to_real(std::string_view key, std::string_view v) {
  std::istringstream in{std::string(v)};
  in.imbue(std::locale::classic());
  double out = 0.0;
  if (!(in >> out) || !in.eof() || !std::isfinite(out)) bad_value(key, v, "a finite number");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> to_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto end = comma == std::string_view::npos ? v.size() : comma;
    out.push_back(to_real(key, trim(v.substr(start, end - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"grid.width", [](auto& c, auto k, auto v) { c.grid_width = to_size(k, v); }},
      {"grid.height", [](auto& c, auto k, auto v) { c.grid_height = to_size(k, v); }},
      {"grid.cell_size", [](auto& c, auto k, auto v) { c.cell_size = to_real(k, v); }},
      {"mask.source",
       [](auto& c, auto k, auto v) {
         if (v == "free") c.mask_source = MaskSource::free;
         else if (v == "generated") c.mask_source = MaskSource::generated;
         else if (v == "file") c.mask_source = MaskSource::file;
         else bad_value(k, v, "one of free, generated, file");
       }},
      {"mask.path", [](auto& c, auto, auto v) { c.mask_path = std::string(v); }},
      {"mask.format", [](auto& c, auto, auto v) { c.mask_format = parse_mask_format(v); }},
      {"mask.buildings", [](auto& c, auto k, auto v) { c.mask_buildings = to_size(k, v); }},
      {"mask.size_min", [](auto& c, auto k, auto v) { c.mask_size_min = to_size(k, v); }},
      {"mask.size_max", [](auto& c, auto k, auto v) { c.mask_size_max = to_size(k, v); }},
      {"kernel.family", [](auto& c, auto, auto v) { c.kernel_family = parse_kernel_family(v); }},
      {"kernel.sigma_f2", [](auto& c, auto k, auto v) { c.kernel_sigma_f2 = to_real(k, v); }},
      {"kernel.lambda", [](auto& c, auto k, auto v) { c.kernel_lambda = to_real(k, v); }},
      {"noise.var", [](auto& c, auto k, auto v) { c.noise_var = to_real(k, v); }},
      {"sampler.mode", [](auto& c, auto, auto v) { c.sampler.mode = parse_sampling_mode(v); }},
      {"sampler.m", [](auto& c, auto k, auto v) { c.sampler.m = to_size(k, v); }},
      {"sampler.ell", [](auto& c, auto k, auto v) { c.sampler.ell = to_size(k, v); }},
      {"sampler.p_persist", [](auto& c, auto k, auto v) { c.sampler.p_persist = to_real(k, v); }},
      {"sampler.p_trig", [](auto& c, auto k, auto v) { c.sampler.p_trig = to_real(k, v); }},
      {"sampler.alpha", [](auto& c, auto k, auto v) { c.sampler.alpha = to_real(k, v); }},
      {"sampler.step_budget", [](auto& c, auto k, auto v) { c.sampler.step_budget = to_size(k, v); }},
      {"fit.family", [](auto& c, auto, auto v) { c.fit_family = parse_kernel_family(v); }},
      {"fit.n_train", [](auto& c, auto k, auto v) { c.fit_n_train = to_size(k, v); }},
      {"fit.lambda_grid", [](auto& c, auto k, auto v) { c.fit_lambda_grid = to_list(k, v); }},
      {"fit.noise_grid", [](auto& c, auto k, auto v) { c.fit_noise_grid = to_list(k, v); }},
      {"estimator.kind", [](auto& c, auto, auto v) { c.estimator_kind = parse_estimator_kind(v); }},
      {"estimator.power", [](auto& c, auto k, auto v) { c.estimator_power = to_real(k, v); }},
      {"diag.r0", [](auto& c, auto k, auto v) { c.diag_r0 = to_real(k, v); }},
      {"field.max_cells", [](auto& c, auto k, auto v) { c.field_max_cells = to_size(k, v); }},
      {"metric.dynamic_range", [](auto& c, auto k, auto v) { c.metrics.dynamic_range = to_real(k, v); }},
      {"metric.ssim_window", [](auto& c, auto k, auto v) { c.metrics.ssim_window = to_size(k, v); }},
      {"metric.ssim_sigma", [](auto& c, auto k, auto v) { c.metrics.ssim_sigma = to_real(k, v); }},
      {"metric.exclude_buildings",
       [](auto& c, auto k, auto v) { c.metrics.exclude_buildings = to_bool(k, v); }},
      {"experiment",
       [](auto& c, auto k, auto v) {
         static const char* known[] = {"cross_eval", "info_suite", "alpha_sweep", "ell_sweep",
                                       "decompose"};
         for (const char* name : known) {
           if (v == name) {
             c.experiment = std::string(v);
             return;
           }
         }
         bad_value(k, v, "a known experiment");
       }},
      {"trials", [](auto& c, auto k, auto v) { c.trials = to_size(k, v); }},
      {"seed", [](auto& c, auto k, auto v) { c.seed = to_u64(k, v); }},
      {"out_dir", [](auto& c, auto, auto v) { c.out_dir = std::string(v); }},
  };
  return table;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ValidationError("unknown config key '" + std::string(key) + "'");
  it->second(cfg, key, value);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, 1);
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError("missing key", line_no, 1);
    try {
      apply_setting(cfg, key, value);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  return parse_config(in);
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.grid_width == 0 || cfg.grid_height == 0) throw ValidationError("grid must be nonempty");
  if (!(cfg.cell_size > 0.0)) throw ValidationError("grid.cell_size must be positive");
  if (cfg.mask_source == MaskSource::file && cfg.mask_path.empty()) {
    throw ValidationError("mask.source = file needs mask.path");
  }
  if (!(cfg.kernel_sigma_f2 > 0.0) || !(cfg.kernel_lambda > 0.0)) {
    throw ValidationError("kernel.sigma_f2 and kernel.lambda must be positive");
  }
  if (!(cfg.noise_var > 0.0)) throw ValidationError("noise.var must be positive");
  if (cfg.fit_lambda_grid.empty() || cfg.fit_noise_grid.empty()) {
    throw ValidationError("fit grids must be nonempty");
  }
  if (cfg.fit_n_train == 0) throw ValidationError("fit.n_train must be positive");
  if (cfg.trials < 2) throw ValidationError("trials must be at least 2");
  if (!(cfg.diag_r0 >= 0.0)) throw ValidationError("diag.r0 must be >= 0");
  validate(cfg.metrics);
  const auto& s = cfg.sampler;
  if (s.m == 0) throw ValidationError("sampler.m must be positive");
  if (!(s.p_persist >= 0.0 && s.p_persist <= 1.0)) throw ValidationError("sampler.p_persist must be in [0, 1]");
  if (!(s.p_trig > 0.0 && s.p_trig <= 1.0)) throw ValidationError("sampler.p_trig must be in (0, 1]");
  if (!(s.alpha >= 0.0 && s.alpha <= 1.0)) throw ValidationError("sampler.alpha must be in [0, 1]");
  if (s.ell == 0) throw ValidationError("sampler.ell must be positive");
}

Kernel true_kernel(const ExperimentConfig& cfg) {
  return Kernel{cfg.kernel_family, cfg.kernel_sigma_f2, cfg.kernel_lambda * cfg.cell_size};
}

EnvironmentMask make_mask(const ExperimentConfig& cfg) {
  const GridSpec grid(cfg.grid_width, cfg.grid_height, cfg.cell_size);
  switch (cfg.mask_source) {
    case MaskSource::free:
      return EnvironmentMask::all_free(grid);
    case MaskSource::generated: {
      Rng rng(derive_seed(cfg.seed, "mask"));
      return generate_mask(grid,
                           {cfg.mask_buildings, cfg.mask_size_min, cfg.mask_size_max, 100},
                           rng);
    }
    case MaskSource::file: {
      auto mask = load_mask(cfg.mask_path, cfg.mask_format, cfg.cell_size);
      if (mask.grid().width() != cfg.grid_width || mask.grid().height() != cfg.grid_height) {
        throw ValidationError("mask file " + cfg.mask_path + " does not match grid.width/height");
      }
      return mask;
    }
  }
  throw ValidationError("unknown mask source");
}

Testbed make_testbed(const ExperimentConfig& cfg) {
  return Testbed::make(make_mask(cfg), true_kernel(cfg), cfg.noise_var, cfg.field_max_cells,
                       cfg.metrics);
}

SearchGrid search_grid(const ExperimentConfig& cfg) {
  SearchGrid g;
  for (const double l : cfg.fit_lambda_grid) g.length_scales.push_back(l * cfg.cell_size);
  g.noise_vars = cfg.fit_noise_grid;
  return g;
}

}  // namespace tbslab
