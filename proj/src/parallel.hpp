#pragma once

#include <cstddef>
#include <exception>

#include "fedmm/algorithms.hpp"

namespace fedmm::detail {

/// Runs body(i) for i in [0, n). Bodies must write only to slot i of their outputs.
template <typename Body>
void for_each_index(Execution exec, std::size_t n, Body&& body) {
  if (exec == Execution::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(fedmm_for_each_index)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fedmm::detail
