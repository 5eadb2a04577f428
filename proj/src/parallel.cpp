#include "sampdes/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sampdes {

namespace {

int hardware_max() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int env_cap() {
  const char* raw = std::getenv("SAMPLE_DESIGN_THREADS");
  if (raw == nullptr) return 0;
  const int value = std::atoi(raw);
  return value > 0 ? value : 0;
}

std::atomic<int> g_override{0};

}  // namespace

int thread_cap() {
  const int over = g_override.load(std::memory_order_relaxed);
  int cap = over > 0 ? over : env_cap();
  if (cap <= 0) cap = hardware_max();
  return std::clamp(cap, 1, hardware_max());
}

void set_thread_cap(int n) {
  g_override.store(n > 0 ? n : 0, std::memory_order_relaxed);
}

}  // namespace sampdes
