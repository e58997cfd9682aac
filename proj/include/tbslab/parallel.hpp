#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace tbslab {

/// Selects the OpenMP kernel or the serial reference path. Both paths give
/// bitwise-identical results: work items own their RNG streams and
/// reductions run in index order afterwards.
enum class Execution { serial, parallel };

/// Runs fn(i) for i in [0, n). Exceptions thrown by work items are caught
/// per item and the one with the lowest index is rethrown after the loop.
template <class Fn>
void for_each_index(Execution exec, std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (exec == Execution::parallel) {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace tbslab
