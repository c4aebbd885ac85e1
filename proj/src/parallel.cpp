#include "spc/parallel.h"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace spc {

namespace {
  thread_local bool insideRegion = false;
}

int
workerCount()
{
  if (insideRegion)
    return 1;
  int hw = int(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("SPCGRID_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1)
      return std::min(cap, hw);
  }
  return hw;
}

void
parallelChunks(
  size_t n, int workers, const std::function<void(size_t, size_t, int)>& fn)
{
  workers = std::max(1, workers);
  if (workers == 1 || n < 2) {
    fn(0, n, 0);
    return;
  }

  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  for (int w = 0; w < workers; w++) {
    size_t begin = n * size_t(w) / size_t(workers);
    size_t end = n * size_t(w + 1) / size_t(workers);
    threads.emplace_back([&, begin, end, w] {
      insideRegion = true;
      try {
        fn(begin, end, w);
      }
      catch (...) {
        errors[size_t(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : threads)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

void
parallelPartitions(
  size_t n, int partitions,
  const std::function<void(size_t, size_t, int)>& fn)
{
  partitions = std::max(1, partitions);
  parallelChunks(size_t(partitions), workerCount(), [&](size_t pb, size_t pe, int) {
    for (size_t p = pb; p < pe; p++)
      fn(n * p / size_t(partitions), n * (p + 1) / size_t(partitions), int(p));
  });
}

}  // namespace spc
