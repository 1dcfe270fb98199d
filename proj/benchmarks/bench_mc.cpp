#include <benchmark/benchmark.h>

#include "porestat/largest_pore.hpp"

using namespace porestat;

namespace {

TailFit bench_fit() {
  TailFit f;
  f.id = "bench";
  f.params = {20.0, 4.0, 0.1};
  f.covariance = mle_covariance(4.0, 0.1, 300);
  f.n_exceed = 300;
  f.lambda_above = 3.0;
  f.lambda_above_var = 0.01;
  f.lambda_below = 10.0;
  f.lambda_below_var = 2.5;
  f.empirical_below = {8.0, 11.0, 15.0, 19.0};
  return f;
}

// Arg: samples per axis, so range(0)³ combinations per iteration.
void BM_SampleLargest(benchmark::State& state) {
  const auto fit = bench_fit();
  McConfig c;
  c.n_count_samples = c.n_param_samples = c.n_p_samples = static_cast<std::size_t>(state.range(0));
  c.mode = static_cast<UncertaintyMode>(state.range(1));
  c.workers = 1;
  c.seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_largest(fit, VolumeOfInterest(50.0), c).mean());
  const double per_iter = static_cast<double>(c.n_count_samples * c.n_param_samples * c.n_p_samples);
  state.counters["combinations/s"] =
      benchmark::Counter(per_iter * static_cast<double>(state.iterations()), benchmark::Counter::kIsRate);
}

}  // namespace

BENCHMARK(BM_SampleLargest)
    ->ArgsProduct({{50, 100, 200}, {static_cast<long>(UncertaintyMode::All)}})
    ->Unit(benchmark::kMillisecond);
