#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "porestat/gpd.hpp"
#include "porestat/threshold.hpp"

using namespace porestat;

namespace {

std::vector<double> gpd_sizes(std::size_t n) {
  const GpdParams p{10.0, 2.0, 0.1};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& d : x) d = gpd_quantile(p, u(rng));
  return x;
}

void BM_FitMle(benchmark::State& state) {
  const auto x = gpd_sizes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(x, 10.0).params.shape);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_StabilityScan(benchmark::State& state) {
  const auto x = gpd_sizes(static_cast<std::size_t>(state.range(0)));
  const auto grid = default_candidate_grid(x);
  for (auto _ : state) benchmark::DoNotOptimize(stability_scan(x, grid).candidates.size());
}

}  // namespace

BENCHMARK(BM_FitMle)->Arg(300)->Arg(5000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StabilityScan)->Arg(2000)->Unit(benchmark::kMillisecond);
