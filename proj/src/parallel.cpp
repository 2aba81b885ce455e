#include "matfdp/parallel.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <string>

namespace matfdp {
namespace {
std::atomic<int> g_threads{0};
}

void set_thread_count(int threads) { g_threads.store(threads > 0 ? threads : 0); }

int thread_count() {
  const int t = g_threads.load();
  return t > 0 ? t : omp_get_max_threads();
}

int configure_threads_from_env() {
  if (const char* env = std::getenv("MATFDP_THREADS")) {
    try {
      const int t = std::stoi(env);
      set_thread_count(t > 0 ? t : 0);
    } catch (const std::exception&) {
      set_thread_count(0);
    }
  } else {
    set_thread_count(0);
  }
  return thread_count();
}

}  // namespace matfdp
