#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tbslab/diagnostics.hpp"
#include "tbslab/experiment.hpp"
#include "tbslab/samplers.hpp"

namespace tbslab {

/// "%.10g" in the C locale; "inf"/"nan" spelled out.
std::string format_real(double v);

/// First line of every CSV: tool name, version and master seed.
void write_audit_header(std::ostream& out, std::uint64_t seed);

void write_result_table(std::ostream& out, const ResultTable& table, std::uint64_t seed);

/// trial_id, order, row, col, sampled. Trajectory cells in visit order with
/// sampled = 1 at the visit that took the sample; samples off the trajectory
/// follow with sampled = 1.
void write_sampling_sets(std::ostream& out, const std::vector<SamplingSet>& sets,
                         std::uint64_t seed);

void write_diagnostics(std::ostream& out, const std::vector<DiagnosticRow>& rows,
                       std::uint64_t seed);
void write_checks(std::ostream& out, const std::vector<CheckRow>& rows, std::uint64_t seed);
void write_mi_reports(std::ostream& out, const std::vector<MIReport>& reports,
                      std::uint64_t seed);

/// Writes `path` as a 16-bit graymap with a linear [min, max] -> [0, 65535]
/// map (all zeros for a constant field) and `path` + ".txt" holding min,
/// max, the constant flag and the annotated sample cells as row,col lines.
void emit_heatmap(const FieldSample& field, const std::filesystem::path& path,
                  const SamplingSet* annotations = nullptr);

struct HeatmapSidecar {
  double min = 0.0;
  double max = 0.0;
  bool constant = false;
  std::vector<Cell> samples;
};

HeatmapSidecar read_heatmap_sidecar(const std::filesystem::path& heatmap_path);

}  // namespace tbslab
