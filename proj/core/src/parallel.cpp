#include "qplab/parallel.hpp"

namespace qplab::parallel {

namespace {
std::atomic<unsigned> g_workers{1};
}

void set_workers(unsigned workers) noexcept {
  if (workers == 0) {
    workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
  }
  g_workers.store(workers, std::memory_order_relaxed);
}

unsigned workers() noexcept { return g_workers.load(std::memory_order_relaxed); }

}  // namespace qplab::parallel
