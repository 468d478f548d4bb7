#include <benchmark/benchmark.h>

#include "delaylab/dcf_sim.hpp"

using namespace delaylab;

namespace {

Scenario table_one_row() {
  Scenario s;
  for (int i = 0; i < 4; ++i) s.nodes.push_back({10.0, Uniform{750, 1500}});
  s.capacity_pkts_per_s = 70.0;
  return s;
}

// Items are simulated application packets.
void BM_DcfSimulation(benchmark::State& state) {
  const auto s = table_one_row();
  RunControl c;
  c.packet_budget = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t delivered = 0;
  for (auto _ : state) {
    const auto r = simulate_dcf(s, MacParams{}, c);
    for (const auto& n : r.nodes) delivered += n.delivered;
    ++c.seed;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(delivered));
}
BENCHMARK(BM_DcfSimulation)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PollingOracle(benchmark::State& state) {
  const auto s = table_one_row();
  RunControl c;
  c.packet_budget = static_cast<std::uint64_t>(state.range(0));
  std::uint64_t delivered = 0;
  for (auto _ : state) {
    const auto r = simulate_rps_oracle(s, c);
    for (const auto& n : r.nodes) delivered += n.delivered;
    ++c.seed;
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(delivered));
}
BENCHMARK(BM_PollingOracle)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_SaturatedCapacity(benchmark::State& state) {
  RunControl c;
  c.horizon_s = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_capacity(MacParams{}, static_cast<int>(state.range(0)), Deterministic{1500},
                                               1500.0, c));
  }
}
BENCHMARK(BM_SaturatedCapacity)->Arg(4)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
