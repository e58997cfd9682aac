#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "tbslab/grid.hpp"

namespace tbslab {

/// csv01: comma-separated 0/1, one grid row per line, no header.
/// pbm:   plain (P1) portable bitmap, 1 = building.
enum class MaskFormat { csv01, pbm };
/// csvfloat: comma-separated reals, one grid row per line.
/// pgm16:    plain (P2) or binary (P5) graymap, normalized by maxval to [0,1].
enum class DenseFormat { csvfloat, pgm16 };

MaskFormat parse_mask_format(std::string_view name);
DenseFormat parse_dense_format(std::string_view name);

EnvironmentMask read_mask(std::istream& in, MaskFormat format, double cell_size = 1.0);
EnvironmentMask load_mask(const std::filesystem::path& path, MaskFormat format,
                          double cell_size = 1.0);
void write_mask(std::ostream& out, const EnvironmentMask& mask, MaskFormat format);
void save_mask(const std::filesystem::path& path, const EnvironmentMask& mask,
               MaskFormat format);

/// When `expected` is given, a file of different dimensions is rejected.
FieldSample read_dense_map(std::istream& in, DenseFormat format,
                           std::optional<GridSpec> expected = std::nullopt);
FieldSample load_dense_map(const std::filesystem::path& path, DenseFormat format,
                           std::optional<GridSpec> expected = std::nullopt);

/// Writes values with round-trip precision.
void write_csv_field(std::ostream& out, const FieldSample& field);
/// Writes raw 16-bit levels as a binary (P5) graymap with maxval 65535.
void write_pgm16(std::ostream& out, const GridSpec& grid,
                 const std::vector<std::uint16_t>& levels);

}  // namespace tbslab
