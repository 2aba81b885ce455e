// Serial reference kernels against their OpenMP counterparts. The OpenMP runs
// use every available thread unless MATFDP_THREADS says otherwise.
#include <benchmark/benchmark.h>

#include <vector>

#include "matfdp/kernels.hpp"
#include "matfdp/matcore.hpp"
#include "matfdp/normal.hpp"
#include "matfdp/parallel.hpp"
#include "matfdp/rng.hpp"

using namespace matfdp;

namespace {

struct Stack {
  std::vector<Matrix> treatment;
  std::vector<Matrix> control;
  kernels::PooledMoments moments;
  Matrix inv_sigma;
};

// Square p x p observations, n = m = 20.
const Stack& stack(Index p) {
  static std::vector<std::pair<Index, Stack>> cache;
  for (const auto& [key, s] : cache)
    if (key == p) return s;
  Stack s;
  CounterRng rng(17, 0, static_cast<std::uint64_t>(p));
  for (int k = 0; k < 20; ++k) s.treatment.push_back(standard_normal_matrix(p, p, rng));
  for (int k = 0; k < 20; ++k) s.control.push_back(standard_normal_matrix(p, p, rng));
  s.moments = kernels::serial::pooled_moments(s.treatment, s.control);
  s.inv_sigma = s.moments.variance.cwiseSqrt().cwiseInverse();
  cache.emplace_back(p, std::move(s));
  return cache.back().second;
}

template <bool Omp>
void BM_PooledMoments(benchmark::State& state) {
  const Stack& s = stack(state.range(0));
  for (auto _ : state) {
    auto m = Omp ? kernels::omp::pooled_moments(s.treatment, s.control)
                 : kernels::serial::pooled_moments(s.treatment, s.control);
    benchmark::DoNotOptimize(m.variance.data());
  }
}

template <bool Omp>
void BM_CorrelationSums(benchmark::State& state) {
  const Stack& s = stack(state.range(0));
  const auto& m = s.moments;
  for (auto _ : state) {
    auto c = Omp ? kernels::omp::correlation_sums(s.treatment, s.control, m.mean_treatment, m.mean_control,
                                                  s.inv_sigma)
                 : kernels::serial::correlation_sums(s.treatment, s.control, m.mean_treatment, m.mean_control,
                                                     s.inv_sigma);
    benchmark::DoNotOptimize(c.row_side.data());
  }
}

template <bool Omp>
void BM_PluginSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  CounterRng rng(5);
  std::vector<double> coef(n), shift(n);
  for (std::size_t l = 0; l < n; ++l) {
    coef[l] = 1.0 + 0.5 * rng.uniform();
    shift[l] = rng.normal();
  }
  const double z = norm_quantile(0.0005);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Omp ? kernels::omp::plugin_sum(coef, shift, z) : kernels::serial::plugin_sum(coef, shift, z));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <bool Omp>
void BM_Gram(benchmark::State& state) {
  CounterRng rng(6);
  const Matrix f = standard_normal_matrix(state.range(0), 200, rng);
  for (auto _ : state) {
    Matrix g = Omp ? kernels::omp::gram(f) : kernels::serial::gram(f);
    benchmark::DoNotOptimize(g.data());
  }
}

template <bool Omp>
void BM_NormalEquations(benchmark::State& state) {
  const Index n = state.range(0), k = 8;
  CounterRng rng(7);
  const DenseLoadingRows design(standard_normal_matrix(n, k, rng));
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::vector<double> w(rows.size()), y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r] = static_cast<Index>(r);
    w[r] = rng.uniform();
    y[r] = rng.normal();
  }
  for (auto _ : state) {
    auto ne = Omp ? kernels::omp::normal_equations(design, rows, w, y)
                  : kernels::serial::normal_equations(design, rows, w, y);
    benchmark::DoNotOptimize(ne.lhs.data());
  }
}

}  // namespace

BENCHMARK(BM_PooledMoments<false>)->Name("pooled_moments/serial")->Arg(100)->Arg(300);
BENCHMARK(BM_PooledMoments<true>)->Name("pooled_moments/omp")->Arg(100)->Arg(300);
BENCHMARK(BM_CorrelationSums<false>)->Name("correlation_sums/serial")->Arg(100)->Arg(300);
BENCHMARK(BM_CorrelationSums<true>)->Name("correlation_sums/omp")->Arg(100)->Arg(300);
BENCHMARK(BM_PluginSum<false>)->Name("plugin_sum/serial")->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_PluginSum<true>)->Name("plugin_sum/omp")->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_Gram<false>)->Name("gram/serial")->Arg(10000)->Arg(40000);
BENCHMARK(BM_Gram<true>)->Name("gram/omp")->Arg(10000)->Arg(40000);
BENCHMARK(BM_NormalEquations<false>)->Name("normal_equations/serial")->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_NormalEquations<true>)->Name("normal_equations/omp")->Arg(1 << 14)->Arg(1 << 18);

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
