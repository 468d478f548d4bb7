#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "delaylab/app_delay.hpp"
#include "delaylab/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace delaylab;

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Scenario make(std::vector<double> lambda, PacketLengthDist dist, double C, Regime regime,
              MomentMode mode = MomentMode::Literal) {
  Scenario s;
  for (double l : lambda) s.nodes.push_back({l, dist});
  s.capacity_pkts_per_s = C;
  s.regime = regime;
  s.moment_mode = mode;
  return s;
}

double sub_oracle(const Scenario& s, std::size_t i) {
  std::vector<double> lambda, omega, omega2;
  for (const auto& n : s.nodes) {
    const auto m = normalized_moments(n.length, s.mtu_bytes);
    lambda.push_back(n.lambda);
    omega.push_back(m.omega);
    omega2.push_back(m.omega2);
  }
  return oracle::sub_mtu_delay(lambda, omega, omega2, s.capacity_pkts_per_s, i);
}

}  // namespace

TEST_SUITE("app_delay") {
  TEST_CASE("sub-MTU closed form matches the oracle") {
    const auto s = make({10, 10, 10, 10}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    const auto d = mean_delay_sub_mtu(s);
    for (std::size_t i = 0; i < 4; ++i) CHECK(d.d_avg[i] == doctest::Approx(sub_oracle(s, i)).epsilon(1e-13));
    CHECK(d.d_avg[0] * 1e3 == doctest::Approx(14.9).epsilon(0.2 / 14.9));
    CHECK(d.rho == doctest::Approx(30.0 / 70.0));

    // Hand check: 0.75/140 * 2.75 / (1 - rho) * (1 - rho)... split into the two terms.
    const double rho = 30.0 / 70.0;
    const double second = 0.75 / 140.0 * (2.0 - rho) / (1.0 - rho);
    const double first = 4 * 10 * (0.5 * 0.5 / 12.0) / (2 * 70.0 * 70.0 * (1 - rho));
    CHECK(d.d_avg[0] == doctest::Approx(first + second).epsilon(1e-13));
  }

  TEST_CASE("sub-MTU heterogeneous and mixed distributions") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      Scenario s;
      s.capacity_pkts_per_s = 50 + 50 * u(gen);
      const std::size_t n = 1 + k % 6;
      for (std::size_t i = 0; i < n; ++i) {
        PacketLengthDist d = Deterministic{100 + 1400 * u(gen)};
        if (i % 3 == 1) d = Uniform{100 + 500 * u(gen), 800 + 700 * u(gen)};
        if (i % 3 == 2) d = Exponential{200 + 500 * u(gen), 1500.0};
        s.nodes.push_back({1.0 + 10.0 * u(gen), d});
      }
      if (s.offered_load() >= 0.95) continue;
      const auto d = mean_delay_sub_mtu(s);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(d.d_avg[i] == doctest::Approx(sub_oracle(s, i)).epsilon(1e-12));
        CHECK(d.d_avg[i] >= normalized_moments(s.nodes[i].length, 1500).omega / s.capacity_pkts_per_s);
      }
    }
  }

  TEST_CASE("light load collapses to one service time") {
    const auto s = make({1e-9, 1e-9}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    const auto d = mean_delay_sub_mtu(s);
    CHECK(d.d_avg[0] == doctest::Approx(0.75 / 70.0).epsilon(1e-8));
    const auto f = make({1e-9}, Deterministic{1500}, 70.0, Regime::SuperMtu);
    CHECK(fragment_delay(f, 0) == doctest::Approx(1.0 / 70.0).epsilon(1e-8));
  }

  TEST_CASE("published sub-MTU rows") {
    auto s = make({16.7, 16.7, 16.7, 16.7}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    CHECK(mean_delay_sub_mtu(s).d_avg[0] * 1e3 == doctest::Approx(24.6).epsilon(0.3 / 24.6));
    s = make({6.7, 6.7, 6.7, 6.7}, Exponential{1125, {}}, 69.2, Regime::SubMtu);
    CHECK(mean_delay_sub_mtu(s).d_avg[0] * 1e3 == doctest::Approx(15.1).epsilon(0.4 / 15.1));
    s = make({13.3, 13.3, 13.3, 13.3}, Exponential{1125, {}}, 69.2, Regime::SubMtu);
    CHECK(mean_delay_sub_mtu(s).d_avg[0] * 1e3 == doctest::Approx(25.6).epsilon(0.4 / 25.6));
  }

  TEST_CASE("fragment delay") {
    const auto s = make({1.7, 1.7, 1.7, 1.7}, Uniform{1500, 4500}, 68.9, Regime::SuperMtu);
    const double rho = s.offered_load();
    CHECK(rho == doctest::Approx(6.8 * 2 / 68.9));
    const double want = oracle::super_mtu_fragment_delay(rho, 2.0, 13.0 / 3.0, 68.9);
    CHECK(want == doctest::Approx(1.0 / (2 * 68.9) * (1 + 4.33333333333 / (2 * (1 - rho)))));
    for (std::size_t i = 0; i < 4; ++i) CHECK(fragment_delay(s, i) == doctest::Approx(want).epsilon(1e-12));
  }

  TEST_CASE("super-MTU closed form and its fragment relation") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
      Scenario s;
      s.regime = Regime::SuperMtu;
      s.capacity_pkts_per_s = 40 + 40 * u(gen);
      const std::size_t n = 1 + k % 5;
      for (std::size_t i = 0; i < n; ++i) {
        const double lo = 1500 + 1500 * u(gen);
        s.nodes.push_back({0.2 + 3 * u(gen), Uniform{lo, lo + 100 + 3000 * u(gen)}});
      }
      if (s.offered_load() >= 0.95) continue;
      const auto d = mean_delay_super_mtu(s);
      const double unit = 1.0 / s.capacity_pkts_per_s;
      for (std::size_t i = 0; i < n; ++i) {
        const auto m = s.moments(i);
        CHECK(d.d_avg[i] ==
              doctest::Approx(oracle::super_mtu_delay(d.rho, m.omega, m.omega2, s.capacity_pkts_per_s))
                  .epsilon(1e-13));
        const double di = d.fragment_delay[i];
        CHECK(di == doctest::Approx(oracle::super_mtu_fragment_delay(d.rho, m.omega, m.omega2,
                                                                     s.capacity_pkts_per_s))
                        .epsilon(1e-12));
        // Packet delay from the fragment delay: last of omega fragments, each
        // one service unit apart. Both sides divide by 1 - rho, hence the
        // looser bound.
        const double relation = 0.5 * (m.omega + 1) * di - 0.5 * (m.omega - 1) * unit;
        const double magnitude = 0.5 * (m.omega + 1) * di + 0.5 * (m.omega - 1) * unit;
        CHECK(std::fabs(relation - d.d_avg[i]) <= 1e-13 * magnitude);
        CHECK(packet_delay_from_fragment(di, m.omega, unit) == doctest::Approx(relation).epsilon(1e-15));
        CHECK(d.cycle_time[i] == doctest::Approx(di - unit).epsilon(1e-12));
        CHECK(d.d_avg[i] >= unit);
      }
    }
  }

  TEST_CASE("regimes agree at the MTU boundary") {
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double C = 70.0;
      const double lambda = rho * C / 3.0;
      const auto sub = mean_delay_sub_mtu(make({lambda, lambda, lambda}, Deterministic{1500}, C, Regime::SubMtu));
      const auto sup =
          mean_delay_super_mtu(make({lambda, lambda, lambda}, Deterministic{1500}, C, Regime::SuperMtu));
      const double closed = 1.0 / (2 * C) * (2 - rho) / (1 - rho);
      CAPTURE(rho);
      CHECK(std::fabs(sub.d_avg[0] - sup.d_avg[0]) <= 16 * kEps * closed);
      CHECK(std::fabs(sub.d_avg[0] - closed) <= 16 * kEps * closed);
    }
  }

  TEST_CASE("published super-MTU rows") {
    auto s = make({1.7, 1.7, 1.7, 1.7}, Uniform{1500, 4500}, 68.9, Regime::SuperMtu);
    CHECK(mean_delay_super_mtu(s).d_avg[0] * 1e3 == doctest::Approx(32.9).epsilon(0.5 / 32.9));
    s = make({5, 5, 5, 5}, Uniform{1500, 4500}, 69.8, Regime::SuperMtu);
    CHECK(mean_delay_super_mtu(s).d_avg[0] * 1e3 == doctest::Approx(58.1).epsilon(0.05 / 58.1));

    s = make({1.7, 1.7, 1.7, 1.7}, Exponential{3000, {}}, 62.5, Regime::SuperMtu);
    CHECK(mean_delay_super_mtu(s).d_avg[0] * 1e3 == doctest::Approx(65.3).epsilon(0.05 / 65.3));
    s.moment_mode = MomentMode::SquaredMean;
    CHECK(mean_delay_super_mtu(s).d_avg[0] * 1e3 == doctest::Approx(34.7).epsilon(0.3 / 34.7));
    s = make({5, 5, 5, 5}, Exponential{3000, {}}, 62.5, Regime::SuperMtu, MomentMode::SquaredMean);
    CHECK(mean_delay_super_mtu(s).d_avg[0] * 1e3 == doctest::Approx(70.7).epsilon(0.5 / 70.7));
  }

  TEST_CASE("delays diverge as load approaches one") {
    double prev_sub = 0, prev_sup = 0;
    for (double gap : {1e-1, 1e-2, 1e-3, 1e-4, 1e-6}) {
      const double rho = 1.0 - gap;
      const double lsub = rho * 70.0 / (2 * 0.75);
      const auto sub = mean_delay_sub_mtu(make({lsub, lsub}, Uniform{750, 1500}, 70.0, Regime::SubMtu));
      const double lsup = rho * 70.0 / (2 * 2.0);
      const auto sup = mean_delay_super_mtu(make({lsup, lsup}, Uniform{1500, 4500}, 70.0, Regime::SuperMtu));
      CHECK(sub.d_avg[0] > prev_sub);
      CHECK(sup.d_avg[0] > prev_sup);
      prev_sub = sub.d_avg[0];
      prev_sup = sup.d_avg[0];
    }
    CHECK(prev_sub > 1e3);
    CHECK(prev_sup > 1e3);
  }

  TEST_CASE("homogeneous scenarios are node-independent") {
    const auto d = analytic_delays(make({3, 3, 3, 3, 3}, Exponential{1125, {}}, 69.2, Regime::SubMtu));
    for (double v : d.d_avg) CHECK(v == d.d_avg[0]);
    const auto e = analytic_delays(make({2, 2, 2}, Uniform{1500, 4500}, 69.2, Regime::SuperMtu));
    for (double v : e.d_avg) CHECK(v == e.d_avg[0]);
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(make({40, 40, 40}, Uniform{750, 1500}, 70.0, Regime::SubMtu).validate(), InstabilityError);
    CHECK_THROWS_AS(mean_delay_sub_mtu(make({40, 40, 40}, Uniform{750, 1500}, 70.0, Regime::SubMtu)),
                    InstabilityError);
    CHECK_THROWS_AS(make({1}, Uniform{1500, 4500}, 70.0, Regime::SubMtu).validate(), ValidationError);
    CHECK_THROWS_AS(make({1}, Uniform{750, 1500}, 70.0, Regime::SuperMtu).validate(), ValidationError);
    CHECK_THROWS_AS(make({1}, Uniform{750, 1500}, 0.0, Regime::SubMtu).validate(), ValidationError);
    CHECK_THROWS_AS(make({}, Uniform{750, 1500}, 70.0, Regime::SubMtu).validate(), ValidationError);
    CHECK_THROWS_AS(mean_delay_super_mtu(make({1}, Uniform{750, 1500}, 70.0, Regime::SubMtu)), ValidationError);
    // Unbounded laws are accepted in either regime.
    CHECK_NOTHROW(make({1}, Exponential{3000, {}}, 70.0, Regime::SuperMtu).validate());
    CHECK_NOTHROW(make({1}, Exponential{1125, {}}, 70.0, Regime::SubMtu).validate());
    try {
      make({1}, Uniform{1500, 4500}, 70.0, Regime::SubMtu).validate("rows[2]");
      FAIL("expected a throw");
    } catch (const ValidationError& e) {
      CHECK(e.field().rfind("rows[2]", 0) == 0);
    }
  }

  TEST_CASE("weighted mean") {
    const auto s = make({2, 2, 2, 34.5}, Uniform{750, 1500}, 70.0, Regime::SubMtu);
    const auto d = analytic_delays(s);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      num += s.nodes[i].lambda * d.d_avg[i];
      den += s.nodes[i].lambda;
    }
    CHECK(d.weighted_mean(s) == doctest::Approx(num / den));
  }
}
