#ifndef MATFDP_PARALLEL_HPP
#define MATFDP_PARALLEL_HPP

#include <cstddef>
#include <vector>

namespace matfdp {

// Worker count used by every OpenMP region in the library.
void set_thread_count(int threads);
int thread_count();

// Reads MATFDP_THREADS (positive integer) and applies it. Returns the count in
// effect afterwards; falls back to the machine default when unset or invalid.
int configure_threads_from_env();

// Block size for reductions. Partial sums are formed per fixed block and then
// combined in block order, so the result does not depend on the thread count.
inline constexpr std::size_t kReduceBlock = 4096;

inline std::size_t block_count(std::size_t n, std::size_t block = kReduceBlock) {
  return (n + block - 1) / block;
}

// Deterministic parallel sum of term(i) for i in [0, n).
template <typename Term>
double blocked_sum(std::size_t n, Term&& term) {
  const std::size_t blocks = block_count(n);
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace matfdp

#endif  // MATFDP_PARALLEL_HPP
