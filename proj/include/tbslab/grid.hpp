#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tbslab/rng.hpp"

namespace tbslab {

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Rectangular grid, row-major with the origin at the top-left cell.
class GridSpec {
 public:
  GridSpec(std::size_t width, std::size_t height, double cell_size = 1.0);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  double cell_size() const noexcept { return cell_size_; }
  std::size_t cell_count() const noexcept { return width_ * height_; }

  Cell coords(std::size_t index) const noexcept {
    return {index / width_, index % width_};
  }
  std::size_t linear_index(Cell c) const noexcept { return c.row * width_ + c.col; }
  std::size_t linear_index(std::size_t row, std::size_t col) const noexcept {
    return row * width_ + col;
  }

  /// Euclidean distance in meters between the centers of two cells.
  double distance(std::size_t a, std::size_t b) const noexcept;
  /// Largest center-to-center distance on the grid, in meters.
  double diameter() const noexcept;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  double cell_size_;
};

/// Binary occupancy map: 1 marks a building, 0 free space.
class EnvironmentMask {
 public:
  /// Throws ValidationError on a length mismatch, a non-binary value, or a
  /// mask without free cells.
  EnvironmentMask(GridSpec grid, std::vector<std::uint8_t> occupancy);

  static EnvironmentMask all_free(GridSpec grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const std::uint8_t> occupancy() const noexcept { return occupancy_; }
  std::span<const std::size_t> free_cells() const noexcept { return free_cells_; }
  bool is_free(std::size_t index) const noexcept { return occupancy_[index] == 0; }

  friend bool operator==(const EnvironmentMask& a, const EnvironmentMask& b) {
    return a.grid_ == b.grid_ && a.occupancy_ == b.occupancy_;
  }

 private:
  GridSpec grid_;
  std::vector<std::uint8_t> occupancy_;
  std::vector<std::size_t> free_cells_;
};

struct BuildingLayout {
  std::size_t building_count = 0;
  std::size_t min_side = 1;
  std::size_t max_side = 1;
  std::size_t max_attempts = 100;
};

/// Drops `building_count` axis-aligned rectangles (overlaps allowed) with
/// uniform side lengths and uniform positions among those fully inside the
/// grid. Retries the
/// whole layout while it leaves no free cell; throws ValidationError once
/// the attempt budget is spent.
EnvironmentMask generate_mask(const GridSpec& grid, const BuildingLayout& layout,
                              Rng& rng);

/// Dense scalar field over a grid (a radio map or a Gaussian field draw).
struct FieldSample {
  GridSpec grid;
  std::vector<double> values;
};

}  // namespace tbslab
