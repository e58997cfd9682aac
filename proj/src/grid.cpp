#include "tbslab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tbslab/errors.hpp"

namespace tbslab {

GridSpec::GridSpec(std::size_t width, std::size_t height, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size) {
  if (width == 0 || height == 0) {
    throw ValidationError("grid dimensions must be positive");
  }
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw ValidationError("cell_size must be a positive finite number");
  }
}

double GridSpec::distance(std::size_t a, std::size_t b) const noexcept {
  const auto ca = coords(a);
  const auto cb = coords(b);
  const double dr = static_cast<double>(ca.row) - static_cast<double>(cb.row);
  const double dc = static_cast<double>(ca.col) - static_cast<double>(cb.col);
  return cell_size_ * std::hypot(dr, dc);
}

double GridSpec::diameter() const noexcept {
  return cell_size_ * std::hypot(static_cast<double>(height_ - 1),
                                 static_cast<double>(width_ - 1));
}

EnvironmentMask::EnvironmentMask(GridSpec grid, std::vector<std::uint8_t> occupancy)
    : grid_(grid), occupancy_(std::move(occupancy)) {
  if (occupancy_.size() != grid_.cell_count()) {
    throw ValidationError("mask has " + std::to_string(occupancy_.size()) +
                          " cells, grid expects " +
                          std::to_string(grid_.cell_count()));
  }
  for (std::size_t i = 0; i < occupancy_.size(); ++i) {
    if (occupancy_[i] > 1) {
      throw ValidationError("mask value at index " + std::to_string(i) +
                            " is not 0 or 1");
    }
    if (occupancy_[i] == 0) free_cells_.push_back(i);
  }
  if (free_cells_.empty()) {
    throw ValidationError("mask has no free cells");
  }
}

EnvironmentMask EnvironmentMask::all_free(GridSpec grid) {
  return EnvironmentMask(grid, std::vector<std::uint8_t>(grid.cell_count(), 0));
}

EnvironmentMask generate_mask(const GridSpec& grid, const BuildingLayout& layout,
                              Rng& rng) {
  const std::size_t limit = std::min(grid.width(), grid.height());
  if (layout.min_side < 1 || layout.min_side > layout.max_side ||
      layout.max_side > limit) {
    throw ValidationError("building side range must satisfy 1 <= min <= max <= " +
                          std::to_string(limit));
  }
  std::uniform_int_distribution<std::size_t> side(layout.min_side, layout.max_side);

  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(layout.max_attempts, 1);
       ++attempt) {
    std::vector<std::uint8_t> occ(grid.cell_count(), 0);
    for (std::size_t b = 0; b < layout.building_count; ++b) {
      const std::size_t h = side(rng);
      const std::size_t w = side(rng);
      // Top-left corners are drawn so the rectangle lies inside the grid.
      const std::size_t r =
          std::uniform_int_distribution<std::size_t>(0, grid.height() - h)(rng);
      const std::size_t c =
          std::uniform_int_distribution<std::size_t>(0, grid.width() - w)(rng);
      const std::size_t r_end = r + h;
      const std::size_t c_end = c + w;
      for (std::size_t i = r; i < r_end; ++i) {
        for (std::size_t j = c; j < c_end; ++j) occ[grid.linear_index(i, j)] = 1;
      }
    }
    if (std::find(occ.begin(), occ.end(), 0) != occ.end()) {
      return EnvironmentMask(grid, std::move(occ));
    }
  }
  throw ValidationError("generate_mask: no free cell left after " +
                        std::to_string(layout.max_attempts) + " attempts");
}

}  // namespace tbslab
