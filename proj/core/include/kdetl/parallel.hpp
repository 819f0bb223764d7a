#pragma once

#include <cstddef>
#include <functional>

namespace kdetl {

// KDETL_WORKERS if set to a positive integer, else hardware concurrency.
std::size_t default_workers();

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index runs
/// exactly once; if any call throws, the exception from the lowest failing
/// index is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = default_workers());

}  // namespace kdetl
