#include <cmath>
#include <sstream>
#include <vector>

#include "delaylab/app_delay.hpp"
#include "delaylab/dcf_sim.hpp"
#include "delaylab/errors.hpp"
#include "delaylab/report.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace delaylab;

namespace {

Scenario make(std::vector<double> lambda, PacketLengthDist dist, double C, Regime regime) {
  Scenario s;
  for (double l : lambda) s.nodes.push_back({l, dist});
  s.capacity_pkts_per_s = C;
  s.regime = regime;
  return s;
}

RunControl budget(std::uint64_t packets, std::uint64_t seed) {
  RunControl c;
  c.packet_budget = packets;
  c.seed = seed;
  return c;
}

bool within_se(double value, const NodeDelaySummary& s, double k) {
  return std::fabs(value - s.mean_delay) <= k * s.standard_error;
}

}  // namespace

TEST_SUITE("dcf_sim") {
  TEST_CASE("lone node is an M/G/1 queue over backoff plus success time") {
    const MacParams mac;
    RunControl c;
    c.horizon_s = 20000.0;
    c.seed = 3;
    const double lambda = 0.5;
    const auto s = make({lambda}, Deterministic{1500}, 70.0, Regime::SubMtu);
    const auto stats = run_dcf_simulation(s, mac, c, 10);
    // Channel holding per frame: stage-0 backoff then the success duration.
    const double w = mac.W;
    const double b1 = (w - 1) / 2.0 * mac.slot_time;
    const double b2 = (w - 1) * (2 * w - 1) / 6.0 * mac.slot_time * mac.slot_time;
    const double ts = mac.success_duration(12000.0);
    const double hold1 = b1 + ts;
    const double hold2 = b2 + 2 * b1 * ts + ts * ts;
    const double queueing = lambda * hold2 / (2.0 * (1.0 - lambda * hold1));
    const double expected = queueing + b1 + mac.frame_airtime(12000.0);
    MESSAGE("lone node: measured " << stats.nodes[0].mean_delay << " +- " << stats.nodes[0].standard_error
                                   << ", expected " << expected);
    CHECK(within_se(expected, stats.nodes[0], 4.0));
    CHECK(stats.nodes[0].min_delay >= mac.frame_airtime(12000.0) - 1e-9);
    CHECK(stats.nodes[0].min_delay <= mac.frame_airtime(12000.0) + mac.slot_time * 0.5);
  }

  TEST_CASE("oracle with one queue and fixed service is M/D/1") {
    // MTU packets with C = 50: service 20 ms, lambda 30 gives rho = 0.6.
    const auto s = make({30.0}, Deterministic{1500}, 50.0, Regime::SubMtu);
    const auto stats = run_rps_oracle(s, budget(200000, 17), 20);
    const double p = 1.0 / 50.0;
    const double pk = oracle::pk_sojourn(30.0, p, p * p);
    CHECK(within_se(pk, stats.nodes[0], 3.0));
    CHECK(stats.nodes[0].mean_delay == doctest::Approx(pk).epsilon(0.01));
  }

  TEST_CASE("oracle matches the closed form on the first published row") {
    const auto s = make({10, 10, 10, 10}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    const auto stats = run_rps_oracle(s, budget(100000, 100), 30);
    const auto analytic = analytic_delays(s);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(stats.nodes[i].mean_delay == doctest::Approx(analytic.d_avg[i]).epsilon(0.02));
    }
    CHECK(stats.aggregate_mean == doctest::Approx(0.0149).epsilon(0.02));
  }

  TEST_CASE("symmetric queues have equal means") {
    const auto s = make({8, 8, 8, 8}, Exponential{1125, {}}, 69.2, Regime::SubMtu);
    const auto stats = run_rps_oracle(s, budget(60000, 200), 30);
    for (std::size_t i = 1; i < 4; ++i) {
      const double se = std::hypot(stats.nodes[i].standard_error, stats.nodes[0].standard_error);
      CHECK(std::fabs(stats.nodes[i].mean_delay - stats.nodes[0].mean_delay) < 4.0 * se);
    }
    const auto dcf = run_dcf_simulation(s, MacParams{}, budget(60000, 300), 10);
    for (std::size_t i = 1; i < 4; ++i) {
      const double se = std::hypot(dcf.nodes[i].standard_error, dcf.nodes[0].standard_error);
      CHECK(std::fabs(dcf.nodes[i].mean_delay - dcf.nodes[0].mean_delay) < 4.0 * se);
    }
  }

  TEST_CASE("oracle fragment service in the super-MTU regime") {
    // Two-fragment packets: the closed form is exact for whole batches.
    const auto s = make({4, 4, 4, 4}, Deterministic{3000}, 70.0, Regime::SuperMtu);
    const auto stats = run_rps_oracle(s, budget(100000, 400), 30);
    const auto analytic = analytic_delays(s);
    MESSAGE("super-MTU det 3000 B: oracle " << stats.aggregate_mean * 1e3 << " ms, closed form "
                                            << analytic.d_avg[0] * 1e3 << " ms");
    CHECK(stats.aggregate_mean == doctest::Approx(analytic.d_avg[0]).epsilon(0.02));
    CHECK(stats.nodes[0].min_delay >= 2.0 / 70.0 - 1e-12);
  }

  TEST_CASE("conservation, lower bound and Little's law on every run") {
    const std::vector<Scenario> cases = {
        make({10, 10, 10, 10}, Uniform{750, 1500}, 70.0, Regime::SubMtu),
        make({2, 21.3, 21.3, 21.3}, Uniform{750, 1500}, 70.0, Regime::SubMtu),
        make({13.3, 13.3, 13.3, 13.3}, Exponential{1125, {}}, 69.2, Regime::SubMtu),
        make({1, 1, 1, 3.7}, Uniform{1500, 4500}, 68.9, Regime::SuperMtu),
        make({5, 5, 5, 5}, Exponential{3000, {}}, 62.5, Regime::SuperMtu),
    };
    std::uint64_t seed = 500;
    for (const auto& s : cases) {
      for (int engine = 0; engine < 2; ++engine) {
        const auto r = engine == 0 ? simulate_dcf(s, MacParams{}, budget(60000, seed++))
                                   : simulate_rps_oracle(s, budget(60000, seed++));
        CHECK(r.conserved());
        for (const auto& n : r.nodes) {
          CHECK(n.arrived == n.delivered + n.in_system_end);
          CHECK(n.lower_bound_violations == 0);
          CHECK(n.delay_min > 0.0);
        }
        CHECK(r.little_max_relative_error() < 0.05);
      }
    }
  }

  TEST_CASE("fixed seeds reproduce bit-identical statistics") {
    const auto s = make({2, 2, 2, 34.5}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    const auto a = run_dcf_simulation(s, MacParams{}, budget(20000, 9), 4, 4);
    const auto b = run_dcf_simulation(s, MacParams{}, budget(20000, 9), 4, 1);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
      CHECK(a.nodes[i].mean_delay == b.nodes[i].mean_delay);
      CHECK(a.nodes[i].standard_error == b.nodes[i].standard_error);
      CHECK(a.nodes[i].samples == b.nodes[i].samples);
    }
    const auto c = run_dcf_simulation(s, MacParams{}, budget(20000, 10), 4, 4);
    CHECK(c.nodes[0].mean_delay != a.nodes[0].mean_delay);

    const auto r1 = simulate_rps_oracle(s, budget(20000, 5));
    const auto r2 = simulate_rps_oracle(s, budget(20000, 5));
    for (std::size_t i = 0; i < r1.nodes.size(); ++i) {
      CHECK(r1.nodes[i].delay_sum == r2.nodes[i].delay_sum);
      CHECK(r1.nodes[i].queue_area == r2.nodes[i].queue_area);
    }
  }

  TEST_CASE("duplicate seeds are a configuration error") {
    const std::vector<std::uint64_t> seeds = {1, 2, 1};
    CHECK_THROWS_AS(run_replications([](std::uint64_t s) {
                        RunResult r;
                        r.seed = s;
                        return r;
                      }, seeds), ConfigError);
    const auto unique = replication_seeds(10, 3);
    CHECK(unique == std::vector<std::uint64_t>{10, 11, 12});
  }

  TEST_CASE("saturated capacity against the renewal-reward model") {
    const MacParams mac;
    RunControl c;
    c.horizon_s = 300.0;
    c.seed = 77;
    const auto est = estimate_capacity(mac, 4, Deterministic{1500}, 1500, c);
    const auto model = aggregate_capacity(mac, 4, 12000.0);
    CHECK(est.bits_per_s == doctest::Approx(model.bits_per_s).epsilon(0.10));
    CHECK(est.mtu_packets_per_s == doctest::Approx(est.bits_per_s / 12000.0));

    // One node: a frame every mean backoff plus success duration.
    const auto one = estimate_capacity(mac, 1, Deterministic{1500}, 1500, c);
    const double frame = (mac.W - 1) / 2.0 * mac.slot_time + mac.success_duration(12000.0);
    CHECK(one.packets_per_s == doctest::Approx(1.0 / frame).epsilon(0.01));
    CHECK(one.collisions == 0);
  }

  TEST_CASE("capacity from n = 2 to n = 20 varies by less than 20%") {
    const MacParams mac;
    RunControl c;
    c.horizon_s = 300.0;
    c.seed = 78;
    const double c2 = estimate_capacity(mac, 2, Deterministic{1500}, 1500, c).bits_per_s;
    const double c20 = estimate_capacity(mac, 20, Deterministic{1500}, 1500, c).bits_per_s;
    MESSAGE("saturated capacity n=2 " << c2 << " b/s, n=20 " << c20 << " b/s");
    CHECK(std::fabs(c2 - c20) / std::max(c2, c20) < 0.20);
  }

  TEST_CASE("trace records fragments and timing") {
    const auto s = make({3, 3}, Uniform{1500, 4500}, 68.9, Regime::SuperMtu);
    std::ostringstream os;
    write_trace_header(os);
    const auto sink = csv_trace_sink(os);
    const auto r = simulate_dcf(s, MacParams{}, budget(2000, 1), sink);
    const auto doc = parse_csv(os.str());
    REQUIRE(doc.header == std::vector<std::string>{"node", "arrival_time_s", "delivery_time_s", "bytes",
                                                   "fragments"});
    std::uint64_t delivered = 0;
    for (const auto& n : r.nodes) delivered += n.delivered;
    CHECK(doc.rows.size() == delivered);
    for (const auto& row : doc.rows) {
      CHECK(row[2] > row[1]);
      CHECK(row[4] == std::max(1.0, std::ceil(row[3] / 1500.0)));
    }
  }

  TEST_CASE("unstable scenarios run with a warning") {
    const auto s = make({50, 50}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    RunControl c;
    c.horizon_s = 20.0;
    const auto r = simulate_rps_oracle(s, c);
    CHECK_FALSE(r.warnings.empty());
    CHECK(r.conserved());
  }

  TEST_CASE("run control") {
    RunControl c;
    CHECK_THROWS_AS(c.resolve_horizon(10.0), ValidationError);
    c.packet_budget = 1000;
    CHECK(c.resolve_horizon(10.0) == doctest::Approx(100.0));
    c.horizon_s = 5.0;
    CHECK(c.resolve_horizon(10.0) == 5.0);
  }

  TEST_CASE("student t quantiles") {
    CHECK(student_t_975(1) == doctest::Approx(12.706).epsilon(1e-4));
    CHECK(student_t_975(29) == doctest::Approx(2.045).epsilon(1e-3));
    CHECK(student_t_975(60) == doctest::Approx(2.000).epsilon(1e-3));
    CHECK(student_t_975(1000000) == doctest::Approx(1.960).epsilon(1e-3));
  }
}
