#include "delaylab/mac_model.hpp"

#include <cmath>
#include <string>

#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string("mac.") + field, "must be a positive finite number");
  }
}

}  // namespace

void MacParams::validate() const {
  if (W < 2) throw ValidationError("mac.W", "initial contention window must be >= 2");
  if (m < 0) throw ValidationError("mac.m", "maximum backoff stage must be >= 0");
  if (m > 30) throw ValidationError("mac.m", "maximum backoff stage must be <= 30");
  require_positive(slot_time, "slot_time");
  require_positive(sifs, "sifs");
  require_positive(difs, "difs");
  require_positive(ack_time, "ack_time");
  require_positive(data_rate_bps, "data_rate_bps");
  if (!(header_bits >= 0.0) || !std::isfinite(header_bits)) {
    throw ValidationError("mac.header_bits", "must be a non-negative finite number");
  }
  if (collision_time) require_positive(*collision_time, "collision_time");
}

double MacParams::frame_airtime(double payload_bits) const {
  return (header_bits + payload_bits) / data_rate_bps;
}

double MacParams::success_duration(double payload_bits) const {
  double t = frame_airtime(payload_bits);
  if (include_ack_overhead) t += sifs + ack_time + difs;
  return t;
}

double MacParams::collision_duration(double payload_bits) const {
  if (collision_time) return *collision_time;
  return frame_airtime(payload_bits) + difs;
}

double backoff_attempt_probability(double p, int W, int m) {
  // 2(1-2p) / ((W+1)(1-2p) + pW(1-(2p)^m)) with (1-(2p)^m)/(1-2p) expanded.
  double geometric = 0.0;
  double term = 1.0;
  for (int k = 0; k < m; ++k) {
    geometric += term;
    term *= 2.0 * p;
  }
  return 2.0 / ((W + 1.0) + p * W * geometric);
}

double contention_attempt_probability(double p, int n) {
  return 1.0 - std::pow(1.0 - p, 1.0 / (n - 1));
}

FixedPointResult solve_fixed_point(const MacParams& params, int n, double tol) {
  params.validate();
  if (n < 1) throw ValidationError("n", "node count must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("tol", "tolerance must be positive");

  FixedPointResult result;
  if (n == 1) {
    result.beta = 2.0 / (params.W + 1.0);
    return result;
  }

  const auto gap = [&](double p) {
    return backoff_attempt_probability(p, params.W, params.m) -
           contention_attempt_probability(p, n);
  };

  // gap(0) > 0 and gap(1) < 0.
  double lo = 0.0;
  double hi = 1.0;
  double mid = 0.5;
  double g = gap(mid);
  int it = 0;
  for (; it < kMaxBisectionIterations; ++it) {
    mid = 0.5 * (lo + hi);
    g = gap(mid);
    if (std::fabs(g) <= tol || mid == lo || mid == hi) break;
    if (g > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  result.p = mid;
  result.beta = backoff_attempt_probability(mid, params.W, params.m);
  result.residual = std::fabs(g);
  result.iterations = it + 1;
  return result;
}

SlotProbabilities slot_probabilities(double beta, int n) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta", "must lie in [0, 1]");
  if (n < 1) throw ValidationError("n", "node count must be >= 1");
  SlotProbabilities s;
  s.success = n * beta * std::pow(1.0 - beta, n - 1);
  s.idle = std::pow(1.0 - beta, n);
  // Complement of the rounded pair, so (success + idle) + collision == 1.0.
  s.collision = 1.0 - (s.success + s.idle);
  return s;
}

Capacity aggregate_capacity(const MacParams& params, int n, double mean_packet_bits,
                            double tol) {
  if (!(mean_packet_bits > 0.0)) {
    throw ValidationError("mean_packet_bits", "must be positive");
  }
  Capacity c;
  c.fixed_point = solve_fixed_point(params, n, tol);
  c.slots = slot_probabilities(c.fixed_point.beta, n);

  const double mean_slot = c.slots.idle * params.slot_time +
                           c.slots.success * params.success_duration(mean_packet_bits) +
                           c.slots.collision * params.collision_duration(mean_packet_bits);
  c.bits_per_s = c.slots.success * mean_packet_bits / mean_slot;
  c.packets_per_s = c.bits_per_s / mean_packet_bits;
  return c;
}

}  // namespace delaylab
