#pragma once

#include <cstdint>

#include "delaylab/app_delay.hpp"
#include "delaylab/mac_model.hpp"
#include "delaylab/sim_stats.hpp"

namespace delaylab {

// Slot-level DCF simulator of a single cell without hidden terminals.
//
// Time advances by idle slots, success slots and collision slots. A node that
// gets a frame draws a backoff counter uniform in [0, 2^k W - 1] and joins the
// contention at the next slot boundary; counters decrement once per idle slot
// and freeze while the medium is busy. A lone transmitter succeeds and resets
// to stage 0; simultaneous transmitters collide and move one stage up, capped
// at m. There is no retry limit. Packets longer than the MTU are split into
// ceil(bytes / MTU) fragments sent back to back from the node's FIFO; a packet
// is delivered when its last fragment's data frame ends.
RunResult simulate_dcf(const Scenario& scenario, const MacParams& mac, const RunControl& control,
                       const TraceSink& trace = {});

// One-limited random polling server: whenever some queue is nonempty it
// picks one uniformly at random among the nonempty queues and serves a single
// unit, switching over in zero time. In the sub-MTU regime a unit is a whole
// packet served in (bytes / MTU) * P / C; in the super-MTU regime it is one of
// ceil(bytes / MTU) fragments, each served in P / C.
RunResult simulate_rps_oracle(const Scenario& scenario, const RunControl& control,
                              const TraceSink& trace = {});

// Replicated runs with seeds control.seed, control.seed + 1, ...
DelayStats run_dcf_simulation(const Scenario& scenario, const MacParams& mac,
                              const RunControl& control, std::size_t replications = 1,
                              unsigned threads = 0);

DelayStats run_rps_oracle(const Scenario& scenario, const RunControl& control,
                          std::size_t replications = 1, unsigned threads = 0);

struct CapacityEstimate {
  double packets_per_s = 0.0;  // application packets delivered per second
  double bits_per_s = 0.0;
  double mtu_packets_per_s = 0.0;  // bits_per_s / (8 * MTU)
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t idle_slots = 0;
};

// Saturated DCF run: every node always has a frame waiting. When
// control.horizon_s is zero the horizon is sized from control.packet_budget
// and the renewal-reward capacity.
CapacityEstimate estimate_capacity(const MacParams& mac, int nodes, const PacketLengthDist& length,
                                   double mtu_bytes, const RunControl& control);

}  // namespace delaylab
