#pragma once

#include <optional>

namespace delaylab {

// PHY/MAC constants of a single-rate DCF cell. Times are in seconds.
//
// The defaults mimic 802.11b DSSS at 1 Mb/s with the long preamble:
// 20 us slots, SIFS 10 us, DIFS 50 us, and a 14 byte ACK sent behind its
// own PLCP header (304 us). Application payloads ride in UDP/IP, so those
// headers count as frame overhead too.
struct MacParams {
  int W = 32;                  // initial contention window, slots
  int m = 5;                   // maximum backoff stage
  double slot_time = 20e-6;    // idle slot duration
  double sifs = 10e-6;
  double difs = 50e-6;
  double ack_time = 304e-6;
  // Per-frame overhead in bits at data_rate_bps: PLCP preamble and header
  // (192), MAC header and FCS (224), IP and UDP headers (224).
  double header_bits = 640.0;
  double data_rate_bps = 1e6;
  // Collision slot duration. When unset it is derived from the frame length:
  // (header_bits + L) / R + DIFS.
  std::optional<double> collision_time;
  // Adds SIFS + ACK + DIFS to the success slot. Off gives the bare
  // T_S = (H + E[P]) / R.
  bool include_ack_overhead = true;

  // Throws ValidationError naming the first offending field.
  void validate() const;

  double frame_airtime(double payload_bits) const;
  double success_duration(double payload_bits) const;
  double collision_duration(double payload_bits) const;
};

struct FixedPointResult {
  double beta = 0.0;      // per-slot attempt probability
  double p = 0.0;         // conditional collision probability
  double residual = 0.0;  // |beta_backoff(p) - beta_contention(p)|
  int iterations = 0;
};

struct SlotProbabilities {
  double success = 0.0;
  double idle = 0.0;
  double collision = 0.0;
};

struct Capacity {
  double bits_per_s = 0.0;
  double packets_per_s = 0.0;  // per packet of the mean length used
  FixedPointResult fixed_point;
  SlotProbabilities slots;

  // Throughput in units of `unit_bits`-sized packets per second, e.g. MTUs.
  double units_per_s(double unit_bits) const { return bits_per_s / unit_bits; }
};

inline constexpr double kDefaultFixedPointTolerance = 1e-12;
inline constexpr int kMaxBisectionIterations = 200;

// Attempt probability implied by the binary exponential backoff chain for a
// given collision probability. Evaluated in the geometric-sum form, which is
// free of the removable singularity at p = 1/2.
double backoff_attempt_probability(double p, int W, int m);

// Attempt probability implied by n - 1 independent contenders causing a
// collision with probability p. Requires n >= 2.
double contention_attempt_probability(double p, int n);

// Unique crossing of the two attempt-probability curves, found by bisection
// on p over [0, 1). n == 1 returns p = 0 and beta = 2 / (W + 1).
FixedPointResult solve_fixed_point(const MacParams& params, int n,
                                   double tol = kDefaultFixedPointTolerance);

SlotProbabilities slot_probabilities(double beta, int n);

// Renewal-reward saturation throughput S(n) = p_s E[P] / E[slot length].
Capacity aggregate_capacity(const MacParams& params, int n, double mean_packet_bits,
                            double tol = kDefaultFixedPointTolerance);

}  // namespace delaylab
