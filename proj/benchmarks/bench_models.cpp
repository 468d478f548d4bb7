#include <benchmark/benchmark.h>

#include <vector>

#include "delaylab/app_delay.hpp"
#include "delaylab/mac_model.hpp"
#include "delaylab/rps.hpp"

using namespace delaylab;

namespace {

Scenario homogeneous(int n, double lambda, Regime regime) {
  Scenario s;
  const PacketLengthDist d = regime == Regime::SubMtu ? PacketLengthDist{Uniform{750, 1500}}
                                                      : PacketLengthDist{Uniform{1500, 4500}};
  for (int i = 0; i < n; ++i) s.nodes.push_back({lambda, d});
  s.capacity_pkts_per_s = 70.0;
  s.regime = regime;
  return s;
}

void BM_FixedPoint(benchmark::State& state) {
  const MacParams mac;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_point(mac, n));
}
BENCHMARK(BM_FixedPoint)->Arg(2)->Arg(10)->Arg(50);

void BM_AggregateCapacity(benchmark::State& state) {
  const MacParams mac;
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_capacity(mac, 4, 12000.0));
}
BENCHMARK(BM_AggregateCapacity);

void BM_SubMtuDelay(benchmark::State& state) {
  const auto s = homogeneous(static_cast<int>(state.range(0)), 20.0 / static_cast<double>(state.range(0)),
                             Regime::SubMtu);
  for (auto _ : state) benchmark::DoNotOptimize(mean_delay_sub_mtu(s));
}
BENCHMARK(BM_SubMtuDelay)->Arg(4)->Arg(64);

void BM_SuperMtuDelay(benchmark::State& state) {
  const auto s = homogeneous(4, 1.7, Regime::SuperMtu);
  for (auto _ : state) benchmark::DoNotOptimize(mean_delay_super_mtu(s));
}
BENCHMARK(BM_SuperMtuDelay);

void BM_NonzeroSwitchover(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<QueueMoments> a(n, batch_poisson_moments(0.5 / static_cast<double>(n), 1.0, 1.0));
  std::vector<ServiceMoments> sv(n, ServiceMoments{1.0, 1.2});
  const auto params = RpsParams::uniform_polling(a, sv).with_constant_switchover(1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(mean_wait_nonzero_switchover(params));
}
BENCHMARK(BM_NonzeroSwitchover)->Arg(4)->Arg(32);

}  // namespace
