#include "tbslab/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tbslab/errors.hpp"
#include "tbslab/grid_io.hpp"

namespace tbslab {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_audit_header(std::ostream& out, std::uint64_t seed) {
  out << "# " << kToolName << ' ' << kToolVersion << " seed=" << seed << '\n';
}

void write_result_table(std::ostream& out, const ResultTable& table, std::uint64_t seed) {
  write_audit_header(out, seed);
  out << "estimator,train_mode,test_mode,trials,mean_mse,stderr,mean_rmse,mean_psnr,mean_ssim,"
         "stalls,g_rob\n";
  for (const auto& row : table.rows) {
    const auto& r = row.report;
    out << r.estimator << ',' << row.train_mode << ',' << row.test_mode << ',' << r.trials << ','
        << format_real(r.mean_mse) << ',' << format_real(r.stderr_mse) << ','
        << format_real(r.mean_rmse) << ',' << format_real(r.mean_psnr) << ','
        << format_real(r.mean_ssim) << ',' << r.stalls << ',' << format_real(row.g_rob) << '\n';
  }
}

void write_sampling_sets(std::ostream& out, const std::vector<SamplingSet>& sets,
                         std::uint64_t seed) {
  write_audit_header(out, seed);
  out << "trial_id,order,row,col,sampled\n";
  for (std::size_t t = 0; t < sets.size(); ++t) {
    const auto& s = sets[t];
    std::vector<char> taken_at(s.trajectory.size(), 0);
    for (const auto step : s.trigger_steps) taken_at[step] = 1;
    std::size_t order = 0;
    for (std::size_t k = 0; k < s.trajectory.size(); ++k) {
      const auto c = s.grid.coords(s.trajectory[k]);
      out << t << ',' << order++ << ',' << c.row << ',' << c.col << ','
          << int(taken_at[k]) << '\n';
    }
    for (std::size_t k = s.trigger_steps.size(); k < s.indices.size(); ++k) {
      const auto c = s.grid.coords(s.indices[k]);
      out << t << ',' << order++ << ',' << c.row << ',' << c.col << ",1\n";
    }
  }
}

void write_diagnostics(std::ostream& out, const std::vector<DiagnosticRow>& rows,
                       std::uint64_t seed) {
  write_audit_header(out, seed);
  out << "mode,statistic,r0_or_lambda,trials,mean,stderr\n";
  for (const auto& r : rows) {
    out << r.mode << ',' << r.statistic << ',' << format_real(r.r0_or_lambda) << ','
        << r.estimate.trials << ',' << format_real(r.estimate.mean) << ','
        << format_real(r.estimate.stderr_mean) << '\n';
  }
}

void write_checks(std::ostream& out, const std::vector<CheckRow>& rows, std::uint64_t seed) {
  write_audit_header(out, seed);
  out << "check,value,threshold,status\n";
  for (const auto& r : rows) {
    out << r.check << ',' << format_real(r.value) << ',' << format_real(r.threshold) << ','
        << to_string(r.status) << '\n';
  }
}

void write_mi_reports(std::ostream& out, const std::vector<MIReport>& reports,
                      std::uint64_t seed) {
  write_audit_header(out, seed);
  out << "exact,diag_term,penalty,approx,residual\n";
  for (const auto& r : reports) {
    out << format_real(r.exact) << ',' << format_real(r.diag_term) << ','
        << format_real(r.penalty) << ',' << format_real(r.approx) << ','
        << format_real(r.residual) << '\n';
  }
}

void emit_heatmap(const FieldSample& field, const std::filesystem::path& path,
                  const SamplingSet* annotations) {
  if (field.values.size() != field.grid.cell_count()) {
    throw ValidationError("heatmap field size does not match its grid");
  }
  const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const bool constant = !(hi > lo);
  std::vector<std::uint16_t> pixels(field.values.size(), 0);
  if (!constant) {
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = static_cast<std::uint16_t>(
          std::lround((field.values[i] - lo) / (hi - lo) * 65535.0));
    }
  }
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path.string());
    write_pgm16(out, field.grid, pixels);
  }
  auto side = path;
  side += ".txt";
  std::ofstream out(side);
  if (!out) throw ValidationError("cannot write " + side.string());
  out << "min " << format_real(lo) << "\nmax " << format_real(hi) << "\nconstant "
      << (constant ? 1 : 0) << '\n';
  if (annotations) {
    for (const auto i : annotations->indices) {
      const auto c = field.grid.coords(i);
      out << c.row << ',' << c.col << '\n';
    }
  }
}

HeatmapSidecar read_heatmap_sidecar(const std::filesystem::path& heatmap_path) {
  auto side = heatmap_path;
  side += ".txt";
  std::ifstream in(side);
  if (!in) throw ValidationError("cannot read " + side.string());
  HeatmapSidecar out;
  std::string key;
  int constant = 0;
  std::string lo, hi;
  if (!(in >> key >> lo) || key != "min" || !(in >> key >> hi) || key != "max" ||
      !(in >> key >> constant) || key != "constant") {
    throw ParseError("malformed heatmap sidecar " + side.string(), 0, 0);
  }
  out.min = std::stod(lo);
  out.max = std::stod(hi);
  out.constant = constant != 0;
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 3;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Cell c;
    if (std::sscanf(line.c_str(), "%zu,%zu", &c.row, &c.col) != 2) {
      throw ParseError("bad sample line in " + side.string(), line_no, 1);
    }
    out.samples.push_back(c);
  }
  return out;
}

}  // namespace tbslab
