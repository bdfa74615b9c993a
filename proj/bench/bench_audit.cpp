// Serial reference vs OpenMP audit kernel on a mid-size instance.

#include <benchmark/benchmark.h>

#include "auctionforge/audit.hpp"

using namespace auctionforge;

namespace {

AuctionInstance bench_instance() {
  return AuctionInstance::population(
      2,
      std::vector<ValueDistribution>(50, ValueDistribution::uniform(0.5, 1.0)),
      0.1, 0.05, 42);
}

void BM_estimate_serial(benchmark::State& state) {
  auto inst = bench_instance();
  auto mech = reserve_welfare(37.0);
  for (auto _ : state) {
    auto est = estimate_serial(*mech, inst, 4000, 1);
    benchmark::DoNotOptimize(est.revenueMean);
  }
}
BENCHMARK(BM_estimate_serial);

void BM_estimate_parallel(benchmark::State& state) {
  auto inst = bench_instance();
  auto mech = reserve_welfare(37.0);
  set_worker_count(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto est = estimate(*mech, inst, 4000, 1);
    benchmark::DoNotOptimize(est.revenueMean);
  }
  set_worker_count(0);
}
BENCHMARK(BM_estimate_parallel)->Arg(2)->Arg(4);

void BM_ir_check_parallel(benchmark::State& state) {
  auto inst = bench_instance();
  auto mech = reserve_welfare(37.0);
  for (auto _ : state) {
    auto ir = check_ir(*mech, inst, 4000, 1);
    benchmark::DoNotOptimize(ir.violations);
  }
}
BENCHMARK(BM_ir_check_parallel);

}  // namespace

BENCHMARK_MAIN();
