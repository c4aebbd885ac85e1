#pragma once

#include <cstddef>
#include <functional>

namespace spc {

// Worker count: SPCGRID_THREADS when set, otherwise hardware concurrency.
// Inside a parallel region this is 1, so nested calls run inline.
int workerCount();

// Fixed partition count for floating-point reductions; results do not
// depend on how many threads execute the partitions.
constexpr int kReductionPartitions = 8;

// Splits [0, n) into `workers` contiguous chunks and runs fn(begin, end,
// worker) for each chunk. Chunk boundaries depend only on n and workers.
void parallelChunks(
  size_t n, int workers,
  const std::function<void(size_t, size_t, int)>& fn);

// Splits [0, n) into `partitions` contiguous ranges and runs fn(begin, end,
// partition) for each, spread over workerCount() threads.
void parallelPartitions(
  size_t n, int partitions,
  const std::function<void(size_t, size_t, int)>& fn);

}  // namespace spc
