#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace delaylab {

// Seedable generator shared by all samplers. Wraps mt19937_64 and converts
// to doubles with an explicit 53-bit mapping so streams are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Independent stream seed derived from (seed, stream) with splitmix64.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  // Uniform integer on [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

struct Deterministic {
  double bytes = 0.0;
};

// Half-open [lo, hi).
struct Uniform {
  double lo = 0.0;
  double hi = 0.0;
};

struct Exponential {
  double mean = 0.0;
  // Optional truncation at `truncate_at` bytes by resampling. Off by default.
  std::optional<double> truncate_at;
};

struct Empirical {
  std::vector<std::pair<double, double>> points;  // (bytes, weight)
};

using PacketLengthDist = std::variant<Deterministic, Uniform, Exponential, Empirical>;

struct NormalizedMoments {
  double omega = 0.0;   // E[P / MTU]
  double omega2 = 0.0;  // E[(P / MTU)^2]
};

struct RawMoments {
  double mean = 0.0;    // bytes
  double second = 0.0;  // bytes^2
};

// Throws ValidationError (field prefix `path`) when the distribution is
// malformed: non-positive sizes, lo >= hi, weights not summing to one.
void validate(const PacketLengthDist& dist, const std::string& path = "distribution");

RawMoments raw_moments(const PacketLengthDist& dist);
NormalizedMoments normalized_moments(const PacketLengthDist& dist, double mtu_bytes);

// Support bounds in bytes. The upper bound is +inf for the exponential.
std::pair<double, double> support(const PacketLengthDist& dist);

std::string describe(const PacketLengthDist& dist);

double sample_length(const PacketLengthDist& dist, Rng& rng);

// Exponential interarrival time with rate lambda.
double next_interarrival(double lambda, Rng& rng);

}  // namespace delaylab
