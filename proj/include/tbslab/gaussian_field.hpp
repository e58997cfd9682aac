#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "tbslab/grid.hpp"
#include "tbslab/parallel.hpp"
#include "tbslab/rng.hpp"

namespace tbslab {

enum class KernelFamily { squared_exponential, exponential };

KernelFamily parse_kernel_family(std::string_view name);
std::string_view to_string(KernelFamily family);

/// Isotropic covariance kernel. `amplitude` is the variance at lag 0 and
/// `length_scale` is in meters.
struct Kernel {
  KernelFamily family = KernelFamily::squared_exponential;
  double amplitude = 1.0;
  double length_scale = 8.0;

  /// Unchecked evaluation at distance r >= 0.
  double operator()(double r) const noexcept;
};

/// Checked evaluation; throws ContractViolation for negative r and
/// ValidationError for non-positive kernel parameters.
double kernel_eval(const Kernel& kernel, double r);

void validate(const Kernel& kernel);

/// Covariance between the cell centers listed in `rows` and `cols`.
/// Entry (a, b) is kernel(distance(rows[a], cols[b])). Uses OpenMP over rows.
Eigen::MatrixXd covariance_block(const Kernel& kernel, const GridSpec& grid,
                                 std::span<const std::size_t> rows,
                                 std::span<const std::size_t> cols,
                                 Execution exec = Execution::parallel);

/// Serial reference for covariance_block; kept for tests and benchmarks.
Eigen::MatrixXd covariance_block_reference(const Kernel& kernel, const GridSpec& grid,
                                           std::span<const std::size_t> rows,
                                           std::span<const std::size_t> cols);

/// Exact simulation of x ~ N(0, K) over every cell of a grid by dense
/// Cholesky. The factor is computed once and shared read-only.
class FieldSimulator {
 public:
  static constexpr std::size_t kDefaultMaxCells = 16384;

  /// Factors K + jitter I with jitter = 1e-8 amplitude, escalating by 10x up
  /// to 1e-4 amplitude. Throws NumericalError if every attempt fails and
  /// ValidationError if the grid exceeds `max_cells`.
  FieldSimulator(const Kernel& kernel, const GridSpec& grid,
                 std::size_t max_cells = kDefaultMaxCells);

  FieldSample sample(Rng& rng) const;

  const Kernel& kernel() const noexcept { return kernel_; }
  const GridSpec& grid() const noexcept { return grid_; }
  double jitter() const noexcept { return jitter_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }

 private:
  Kernel kernel_;
  GridSpec grid_;
  double jitter_ = 0.0;
  Eigen::MatrixXd factor_;
};

/// One-off draw; builds a FieldSimulator internally.
FieldSample sample_field(const Kernel& kernel, const GridSpec& grid, Rng& rng,
                         std::size_t max_cells = FieldSimulator::kDefaultMaxCells);

/// Cholesky factor of `matrix + jitter I`, escalating jitter from
/// `first_jitter` by 10x until `max_jitter`. Returns the jitter used.
double factor_with_jitter(const Eigen::MatrixXd& matrix, double first_jitter,
                          double max_jitter, Eigen::LLT<Eigen::MatrixXd>& llt);

}  // namespace tbslab
