#include "auctionforge/common.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>

namespace auctionforge {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {
std::atomic<int> g_worker_override{0};
}

int worker_count() {
  int n = g_worker_override.load(std::memory_order_relaxed);
  if (n > 0) return n;
  if (const char* env = std::getenv("AUCTIONFORGE_THREADS")) {
    int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return omp_get_max_threads();
}

void set_worker_count(int n) {
  g_worker_override.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

}  // namespace auctionforge
