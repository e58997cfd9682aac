#include "tbslab/gaussian_field.hpp"

#include <cmath>
#include <string>

#include "tbslab/errors.hpp"

namespace tbslab {

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "squared_exponential" || name == "se") return KernelFamily::squared_exponential;
  if (name == "exponential" || name == "exp") return KernelFamily::exponential;
  throw ValidationError("unknown kernel family '" + std::string(name) + "'");
}

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::squared_exponential ? "squared_exponential"
                                                     : "exponential";
}

double Kernel::operator()(double r) const noexcept {
  if (family == KernelFamily::squared_exponential) {
    const double u = r / length_scale;
    return amplitude * std::exp(-0.5 * u * u);
  }
  return amplitude * std::exp(-r / length_scale);
}

void validate(const Kernel& kernel) {
  if (!(kernel.amplitude > 0.0) || !std::isfinite(kernel.amplitude)) {
    throw ValidationError("kernel amplitude must be positive");
  }
  if (!(kernel.length_scale > 0.0) || !std::isfinite(kernel.length_scale)) {
    throw ValidationError("kernel length scale must be positive");
  }
}

double kernel_eval(const Kernel& kernel, double r) {
  if (!(r >= 0.0)) throw ContractViolation("kernel_eval: distance must be >= 0");
  validate(kernel);
  return kernel(r);
}

namespace {

void check_indices(const GridSpec& grid, std::span<const std::size_t> idx) {
  for (const auto i : idx) {
    if (i >= grid.cell_count()) {
      throw ContractViolation("covariance_block: index " + std::to_string(i) +
                              " out of range for " + std::to_string(grid.cell_count()) +
                              " cells");
    }
  }
}

void fill_row(const Kernel& kernel, const GridSpec& grid, std::size_t row_cell,
              std::span<const std::size_t> cols, Eigen::MatrixXd& out, Eigen::Index a) {
  for (std::size_t b = 0; b < cols.size(); ++b) {
    out(a, static_cast<Eigen::Index>(b)) = kernel(grid.distance(row_cell, cols[b]));
  }
}

}  // namespace

Eigen::MatrixXd covariance_block_reference(const Kernel& kernel, const GridSpec& grid,
                                           std::span<const std::size_t> rows,
                                           std::span<const std::size_t> cols) {
  validate(kernel);
  check_indices(grid, rows);
  check_indices(grid, cols);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a) {
    fill_row(kernel, grid, rows[a], cols, out, static_cast<Eigen::Index>(a));
  }
  return out;
}

Eigen::MatrixXd covariance_block(const Kernel& kernel, const GridSpec& grid,
                                 std::span<const std::size_t> rows,
                                 std::span<const std::size_t> cols, Execution exec) {
  if (exec == Execution::serial) return covariance_block_reference(kernel, grid, rows, cols);
  validate(kernel);
  check_indices(grid, rows);
  check_indices(grid, cols);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  const auto n = static_cast<long long>(rows.size());
#pragma omp parallel for schedule(static)
  for (long long a = 0; a < n; ++a) {
    fill_row(kernel, grid, rows[static_cast<std::size_t>(a)], cols, out,
             static_cast<Eigen::Index>(a));
  }
  return out;
}

double factor_with_jitter(const Eigen::MatrixXd& matrix, double first_jitter,
                          double max_jitter, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const auto n = matrix.rows();
  double jitter = first_jitter;
  while (true) {
    Eigen::MatrixXd work = matrix;
    work.diagonal().array() += jitter;
    llt.compute(work);
    if (llt.info() == Eigen::Success) return jitter;
    jitter *= 10.0;
    if (jitter > max_jitter * (1.0 + 1e-12)) {
      throw NumericalError("Cholesky factorization of a " + std::to_string(n) + "x" +
                           std::to_string(n) + " covariance failed up to jitter " +
                           std::to_string(max_jitter));
    }
  }
}

FieldSimulator::FieldSimulator(const Kernel& kernel, const GridSpec& grid,
                               std::size_t max_cells)
    : kernel_(kernel), grid_(grid) {
  validate(kernel);
  const auto d = grid.cell_count();
  if (d > max_cells) {
    throw ValidationError("grid has " + std::to_string(d) +
                          " cells, dense simulation is limited to " +
                          std::to_string(max_cells));
  }
  std::vector<std::size_t> all(d);
  for (std::size_t i = 0; i < d; ++i) all[i] = i;
  const Eigen::MatrixXd cov = covariance_block(kernel, grid, all, all);
  // Factor in place to keep a single d x d copy next to the covariance.
  const double max_jitter = 1e-4 * kernel.amplitude;
  for (double jitter = 1e-8 * kernel.amplitude;; jitter *= 10.0) {
    factor_ = cov;
    factor_.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(factor_);
    if (llt.info() == Eigen::Success) {
      jitter_ = jitter;
      factor_.triangularView<Eigen::StrictlyUpper>().setZero();
      return;
    }
    if (jitter * 10.0 > max_jitter * (1.0 + 1e-12)) break;
  }
  throw NumericalError("Cholesky factorization of the " + std::to_string(d) +
                       "-cell field covariance failed up to jitter 1e-4 * amplitude");
}

FieldSample FieldSimulator::sample(Rng& rng) const {
  const auto d = static_cast<Eigen::Index>(grid_.cell_count());
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z(i) = normal(rng);
  const Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>() * z;
  return {grid_, std::vector<double>(x.data(), x.data() + d)};
}

FieldSample sample_field(const Kernel& kernel, const GridSpec& grid, Rng& rng,
                         std::size_t max_cells) {
  return FieldSimulator(kernel, grid, max_cells).sample(rng);
}

}  // namespace tbslab
