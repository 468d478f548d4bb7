#include <cmath>
#include <vector>

#include "delaylab/distributions.hpp"
#include "delaylab/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace delaylab;

namespace {

struct SampleMoments {
  double mean = 0.0;
  double second = 0.0;
  double se_mean = 0.0;
  double se_second = 0.0;
};

SampleMoments sample_moments(const PacketLengthDist& d, std::size_t count, std::uint64_t seed,
                             double scale = 1.0) {
  Rng rng(seed);
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double x = sample_length(d, rng) / scale;
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  const double n = static_cast<double>(count);
  SampleMoments m;
  m.mean = s1 / n;
  m.second = s2 / n;
  m.se_mean = std::sqrt((m.second - m.mean * m.mean) / n);
  m.se_second = std::sqrt((s4 / n - m.second * m.second) / n);
  return m;
}

}  // namespace

TEST_SUITE("distributions") {
  TEST_CASE("normalized moments in closed form") {
    auto m = normalized_moments(Uniform{750, 1500}, 1500);
    CHECK(m.omega == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(m.omega2 == doctest::Approx(0.5 * 0.5 / 12.0 + 0.5625).epsilon(1e-15));
    CHECK(m.omega2 == doctest::Approx(0.583333333333).epsilon(1e-10));

    m = normalized_moments(Deterministic{1500}, 1500);
    CHECK(m.omega == 1.0);
    CHECK(m.omega2 == 1.0);

    m = normalized_moments(Exponential{3000, std::nullopt}, 1500);
    CHECK(m.omega == doctest::Approx(2.0));
    CHECK(m.omega2 == doctest::Approx(8.0));

    m = normalized_moments(Uniform{1500, 4500}, 1500);
    CHECK(m.omega == doctest::Approx(2.0));
    CHECK(m.omega2 == doctest::Approx(4.0 + 1.0 / 3.0));

    m = normalized_moments(Empirical{{{500, 0.5}, {1500, 0.5}}}, 1500);
    CHECK(m.omega == doctest::Approx(2.0 / 3.0));
    CHECK(m.omega2 == doctest::Approx(0.5 / 9.0 + 0.5));
  }

  TEST_CASE("variance is nonnegative and zero only for deterministic") {
    const std::vector<PacketLengthDist> dists = {
        Deterministic{100},        Deterministic{9000},       Uniform{1, 2},
        Uniform{750, 1500},        Exponential{1125, {}},     Exponential{1125, 1500.0},
        Empirical{{{100, 1.0}}},   Empirical{{{100, 0.3}, {200, 0.7}}}};
    for (const auto& d : dists) {
      const auto m = normalized_moments(d, 1500);
      const double var = m.omega2 - m.omega * m.omega;
      CHECK(var >= -1e-15);
      const bool degenerate = std::holds_alternative<Deterministic>(d) ||
                              (std::holds_alternative<Empirical>(d) &&
                               std::get<Empirical>(d).points.size() == 1);
      if (degenerate) {
        CHECK(std::fabs(var) < 1e-15);
      } else {
        CHECK(var > 0.0);
      }
    }
  }

  TEST_CASE("monte carlo moments within 4 standard errors") {
    const std::vector<PacketLengthDist> dists = {
        Uniform{750, 1500},     Uniform{1500, 4500},
        Exponential{1125, {}},  Exponential{3000, {}},
        Exponential{600, 1500.0}, Empirical{{{300, 0.2}, {900, 0.5}, {1500, 0.3}}}};
    std::uint64_t seed = 11;
    for (const auto& d : dists) {
      CAPTURE(describe(d));
      const auto exact = raw_moments(d);
      const auto mc = sample_moments(d, 1'000'000, seed++);
      CHECK(std::fabs(mc.mean - exact.mean) < 4.0 * mc.se_mean);
      CHECK(std::fabs(mc.second - exact.second) < 4.0 * mc.se_second);
    }
  }

  TEST_CASE("exponential mean 3000 over 1e7 draws gives omega2 = 8") {
    const auto mc = sample_moments(Exponential{3000, {}}, 10'000'000, 5, 1500.0);
    CHECK(std::fabs(mc.mean - 2.0) < 3.0 * mc.se_mean);
    CHECK(std::fabs(mc.second - 8.0) < 3.0 * mc.se_second);
  }

  TEST_CASE("uniform sample mean over 1e6 draws") {
    const auto mc = sample_moments(Uniform{750, 1500}, 1'000'000, 3);
    CHECK(std::fabs(mc.mean - 1125.0) < 1.0);
  }

  TEST_CASE("exponential second moment within 1%") {
    const auto mc = sample_moments(Exponential{1125, {}}, 1'000'000, 4);
    CHECK(mc.second == doctest::Approx(2.0 * 1125.0 * 1125.0).epsilon(0.01));
  }

  TEST_CASE("samples respect support") {
    Rng rng(9);
    for (int k = 0; k < 200000; ++k) {
      const double u = sample_length(Uniform{750, 1500}, rng);
      CHECK_UNARY(u >= 750.0 && u < 1500.0);
      const double t = sample_length(Exponential{1125, 1500.0}, rng);
      CHECK_UNARY(t >= 0.0 && t <= 1500.0);
    }
    for (int k = 0; k < 100; ++k) CHECK(sample_length(Deterministic{1500}, rng) == 1500.0);
  }

  TEST_CASE("interarrival times") {
    Rng rng(21);
    double sum = 0.0;
    for (int k = 0; k < 1'000'000; ++k) sum += next_interarrival(10.0, rng);
    CHECK(std::fabs(sum / 1e6 - 0.1) < 0.001);

    Rng counter(22);
    double t = 0.0;
    int count = 0;
    while ((t += next_interarrival(10.0, counter)) <= 1000.0) ++count;
    CHECK(std::abs(count - 10000) < 300);

    // Memorylessness: residual life beyond t = 0.1 has the original mean.
    Rng mem(23);
    double residual = 0.0;
    int kept = 0;
    for (int k = 0; k < 2'000'000; ++k) {
      const double x = next_interarrival(10.0, mem);
      if (x > 0.1) {
        residual += x - 0.1;
        ++kept;
      }
    }
    CHECK(residual / kept == doctest::Approx(0.1).epsilon(0.01));
    CHECK_THROWS_AS(next_interarrival(0.0, rng), ValidationError);
  }

  TEST_CASE("seeded generators are reproducible and streams differ") {
    Rng a(42), b(42);
    for (int k = 0; k < 1000; ++k) CHECK(a.uniform() == b.uniform());
    CHECK(Rng::derive(1, 0) != Rng::derive(1, 1));
    CHECK(Rng::derive(1, 0) != Rng::derive(2, 0));
    Rng c(7);
    for (int k = 0; k < 10000; ++k) {
      const double u = c.uniform();
      CHECK_UNARY(u >= 0.0 && u < 1.0);
      CHECK(c.below(6) < 6u);
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(validate(Uniform{1500, 750}), ValidationError);
    CHECK_THROWS_AS(validate(Uniform{0, 750}), ValidationError);
    CHECK_THROWS_AS(validate(Deterministic{-1}), ValidationError);
    CHECK_THROWS_AS(validate(Exponential{0, {}}), ValidationError);
    CHECK_THROWS_AS(validate(Empirical{{{100, 0.5}}}), ValidationError);
    CHECK_THROWS_AS(validate(Empirical{}), ValidationError);
    try {
      validate(Uniform{1500, 750}, "rows[0].distribution");
      FAIL("expected a throw");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "rows[0].distribution.hi");
    }
  }

  TEST_CASE("support") {
    CHECK(support(Uniform{750, 1500}) == std::pair{750.0, 1500.0});
    CHECK(std::isinf(support(Exponential{10, {}}).second));
    CHECK(support(Exponential{10, 20.0}).second == 20.0);
    CHECK(support(Empirical{{{5, 0.0}, {10, 0.5}, {20, 0.5}}}) == std::pair{10.0, 20.0});
  }
}
