#include "cemfrac/parallel.hpp"

#include <algorithm>

#include <omp.h>

namespace cemfrac {

namespace {
int g_threads = 0;
}

void set_thread_count(int n) { g_threads = n > 0 ? n : 0; }

int thread_count() { return g_threads > 0 ? g_threads : omp_get_num_procs(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  if (n == 0) return;
  const int threads = static_cast<int>(std::min<std::size_t>(thread_count(), n));
  if (threads <= 1 || n < 256) {
    body(0, n);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(threads)
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = n * static_cast<std::size_t>(t) / threads;
    const std::size_t end = n * static_cast<std::size_t>(t + 1) / threads;
    body(begin, end);
  }
}

}  // namespace cemfrac
