#include <benchmark/benchmark.h>

#include <numeric>

#include "shapetest/classdist.hpp"
#include "shapetest/tester.hpp"

using namespace shapetest;

namespace {

struct Fixture {
  Pmf q;
  SampleCounts counts;
  IndexSet A;
  explicit Fixture(std::size_t n) : q(gen_zipf(n, 0.7)), counts(poissonized_draw(uniform_pmf(n), 20 * n, 1)), A(n) {
    std::iota(A.begin(), A.end(), 0);
  }
};

void BM_chi2_serial(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(chi2_statistic_serial(f.counts, f.q, f.A));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_chi2_parallel(benchmark::State& st) {
  Fixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(chi2_statistic(f.counts, f.q, f.A));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_poissonized_draw(benchmark::State& st) {
  auto p = gen_zipf(static_cast<std::size_t>(st.range(0)), 1.0);
  RngSeed s = 0;
  for (auto _ : st) benchmark::DoNotOptimize(poissonized_draw(p, 10 * p.n(), ++s));
}

void BM_dist_to_unimodal(benchmark::State& st) {
  auto p = perturb_far_from_unimodal(gen_triangular(static_cast<std::size_t>(st.range(0))), 0.1, 2);
  for (auto _ : st) benchmark::DoNotOptimize(dist_to_unimodal(p));
}

}  // namespace

BENCHMARK(BM_chi2_serial)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_chi2_parallel)->RangeMultiplier(10)->Range(1000, 1000000);
BENCHMARK(BM_poissonized_draw)->RangeMultiplier(10)->Range(1000, 100000);
BENCHMARK(BM_dist_to_unimodal)->RangeMultiplier(10)->Range(1000, 100000);

BENCHMARK_MAIN();
