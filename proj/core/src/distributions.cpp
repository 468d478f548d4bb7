#include "delaylab/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

}  // namespace

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection on the top partial block keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

void validate(const PacketLengthDist& dist, const std::string& path) {
  std::visit(
      Overloaded{
          [&](const Deterministic& d) {
            if (!positive_finite(d.bytes)) throw ValidationError(path + ".bytes", "must be > 0");
          },
          [&](const Uniform& u) {
            if (!positive_finite(u.lo)) throw ValidationError(path + ".lo", "must be > 0");
            if (!std::isfinite(u.hi) || !(u.lo < u.hi)) {
              throw ValidationError(path + ".hi", "must exceed lo");
            }
          },
          [&](const Exponential& e) {
            if (!positive_finite(e.mean)) throw ValidationError(path + ".mean", "must be > 0");
            if (e.truncate_at && !positive_finite(*e.truncate_at)) {
              throw ValidationError(path + ".truncate_at", "must be > 0");
            }
          },
          [&](const Empirical& e) {
            if (e.points.empty()) throw ValidationError(path + ".points", "must not be empty");
            double total = 0.0;
            for (std::size_t i = 0; i < e.points.size(); ++i) {
              const auto& [bytes, weight] = e.points[i];
              const std::string at = path + ".points[" + std::to_string(i) + "]";
              if (!positive_finite(bytes)) throw ValidationError(at, "bytes must be > 0");
              if (!(weight >= 0.0) || !std::isfinite(weight)) {
                throw ValidationError(at, "weight must be >= 0");
              }
              total += weight;
            }
            if (std::fabs(total - 1.0) > 1e-9) {
              throw ValidationError(path + ".points", "weights must sum to 1");
            }
          },
      },
      dist);
}

RawMoments raw_moments(const PacketLengthDist& dist) {
  return std::visit(
      Overloaded{
          [](const Deterministic& d) { return RawMoments{d.bytes, d.bytes * d.bytes}; },
          [](const Uniform& u) {
            const double mean = 0.5 * (u.lo + u.hi);
            const double width = u.hi - u.lo;
            return RawMoments{mean, width * width / 12.0 + mean * mean};
          },
          [](const Exponential& e) {
            const double mu = e.mean;
            if (!e.truncate_at) return RawMoments{mu, 2.0 * mu * mu};
            const double t = *e.truncate_at;
            const double tail = std::exp(-t / mu);
            const double mass = -std::expm1(-t / mu);
            const double first = (mu - tail * (t + mu)) / mass;
            const double second = (2.0 * mu * mu - tail * (t * t + 2.0 * mu * t + 2.0 * mu * mu)) / mass;
            return RawMoments{first, second};
          },
          [](const Empirical& e) {
            RawMoments m;
            for (const auto& [bytes, weight] : e.points) {
              m.mean += weight * bytes;
              m.second += weight * bytes * bytes;
            }
            return m;
          },
      },
      dist);
}

NormalizedMoments normalized_moments(const PacketLengthDist& dist, double mtu_bytes) {
  if (!positive_finite(mtu_bytes)) throw ValidationError("mtu_bytes", "must be > 0");
  validate(dist);
  const RawMoments raw = raw_moments(dist);
  return {raw.mean / mtu_bytes, raw.second / (mtu_bytes * mtu_bytes)};
}

std::pair<double, double> support(const PacketLengthDist& dist) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      Overloaded{
          [](const Deterministic& d) { return std::pair{d.bytes, d.bytes}; },
          [](const Uniform& u) { return std::pair{u.lo, u.hi}; },
          [&](const Exponential& e) { return std::pair{0.0, e.truncate_at.value_or(inf)}; },
          [&](const Empirical& e) {
            double lo = inf;
            double hi = 0.0;
            for (const auto& [bytes, weight] : e.points) {
              if (weight <= 0.0) continue;
              lo = std::min(lo, bytes);
              hi = std::max(hi, bytes);
            }
            return std::pair{lo, hi};
          },
      },
      dist);
}

std::string describe(const PacketLengthDist& dist) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Deterministic& d) { os << "det(" << d.bytes << " B)"; },
                 [&](const Uniform& u) { os << "uniform[" << u.lo << ", " << u.hi << ") B"; },
                 [&](const Exponential& e) {
                   os << "exp(mean " << e.mean << " B";
                   if (e.truncate_at) os << ", truncated at " << *e.truncate_at << " B";
                   os << ")";
                 },
                 [&](const Empirical& e) { os << "empirical(" << e.points.size() << " points)"; },
             },
             dist);
  return os.str();
}

double sample_length(const PacketLengthDist& dist, Rng& rng) {
  return std::visit(
      Overloaded{
          [](const Deterministic& d) { return d.bytes; },
          [&](const Uniform& u) {
            const double x = u.lo + (u.hi - u.lo) * rng.uniform();
            return x < u.hi ? x : std::nextafter(u.hi, u.lo);
          },
          [&](const Exponential& e) {
            for (;;) {
              const double x = -e.mean * std::log(rng.uniform_open_low());
              if (!e.truncate_at || x <= *e.truncate_at) return x;
            }
          },
          [&](const Empirical& e) {
            const double u = rng.uniform();
            double acc = 0.0;
            for (const auto& [bytes, weight] : e.points) {
              acc += weight;
              if (u < acc) return bytes;
            }
            return e.points.back().first;
          },
      },
      dist);
}

double next_interarrival(double lambda, Rng& rng) {
  if (!positive_finite(lambda)) throw ValidationError("lambda", "must be > 0");
  return -std::log(rng.uniform_open_low()) / lambda;
}

}  // namespace delaylab
