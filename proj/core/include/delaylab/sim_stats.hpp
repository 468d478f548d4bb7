#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace delaylab {

struct RunControl {
  // Simulated seconds. When zero, derived from packet_budget / sum(lambda).
  double horizon_s = 0.0;
  // Expected number of application packets over the whole run.
  std::uint64_t packet_budget = 0;
  // Leading fraction of simulated time whose packets are discarded.
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;

  // Resolved horizon for a total arrival rate. Throws ValidationError.
  double resolve_horizon(double total_rate) const;
};

struct PacketRecord {
  std::uint32_t node = 0;
  double arrival_time_s = 0.0;
  double delivery_time_s = 0.0;
  double bytes = 0.0;
  std::uint32_t fragments = 0;
};

using TraceSink = std::function<void(const PacketRecord&)>;

// CSV trace writer: header "node,arrival_time_s,delivery_time_s,bytes,fragments".
TraceSink csv_trace_sink(std::ostream& out);
void write_trace_header(std::ostream& out);

struct NodeRunStats {
  std::uint64_t arrived = 0;        // whole run
  std::uint64_t delivered = 0;      // whole run
  std::uint64_t in_system_end = 0;  // undelivered at the horizon
  std::uint64_t window_arrivals = 0;
  std::uint64_t samples = 0;  // packets arrived after warmup and delivered
  double delay_sum = 0.0;
  double delay_sq_sum = 0.0;
  double delay_min = std::numeric_limits<double>::infinity();
  double delay_max = 0.0;
  double queue_area = 0.0;  // integral of packets in system over the window
  std::uint64_t lower_bound_violations = 0;

  double mean_delay() const { return samples ? delay_sum / static_cast<double>(samples) : 0.0; }
};

struct RunResult {
  std::uint64_t seed = 0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::vector<NodeRunStats> nodes;
  // DCF channel counters (zero for the polling oracle).
  std::uint64_t idle_slots = 0;
  std::uint64_t successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t window_deliveries = 0;  // packets delivered inside the window
  double window_delivered_bits = 0.0;
  std::vector<std::string> warnings;

  double window_length() const { return window_end - window_start; }
  bool conserved() const;
  // max over nodes of |L - lambda W| / L; nodes without samples are skipped.
  double little_max_relative_error() const;
};

// Per-node bookkeeping shared by both simulators: packet population, the
// windowed time integral, and delay samples.
class NodeAccounting {
 public:
  NodeAccounting(double window_start, double window_end)
      : window_start_(window_start), window_end_(window_end) {}

  void on_arrival(double t);
  // `min_delay` is the total transmission time of the packet's fragments;
  // `clock_steps` is how many clock advances the packet saw in service
  // (one per fragment), which bounds the rounding in t - arrival_time.
  void on_delivery(double t, double arrival_time, double min_delay, std::uint32_t clock_steps = 1);
  // Closes the time integral at the horizon.
  NodeRunStats finish(double horizon);

 private:
  void advance(double t);

  double window_start_;
  double window_end_;
  double last_change_ = 0.0;
  std::uint64_t population_ = 0;
  NodeRunStats stats_;
};

struct NodeDelaySummary {
  std::uint64_t samples = 0;   // pooled over replications
  double mean_delay = 0.0;     // mean of replication means, s
  double between_sd = 0.0;     // sd of replication means
  double standard_error = 0.0;
  double ci_half_width = 0.0;  // 95% Student-t; NaN with one replication
  double throughput_pkts_per_s = 0.0;
  double mean_queue_length = 0.0;
  double min_delay = 0.0;
};

struct DelayStats {
  std::vector<NodeDelaySummary> nodes;
  // Arrival-weighted mean over nodes, with replication-based error.
  double aggregate_mean = 0.0;
  double aggregate_standard_error = 0.0;
  double aggregate_ci_half_width = 0.0;
  // Delivered packets per second inside the window, summed over nodes.
  double delivered_pkts_per_s = 0.0;
  double delivered_bits_per_s = 0.0;
  std::size_t replications = 0;
  std::vector<std::uint64_t> seeds;
  bool conservation_ok = true;
  double little_max_relative_error = 0.0;
  std::uint64_t lower_bound_violations = 0;
  std::vector<std::string> warnings;
};

// Two-sided 95% Student-t quantile with `dof` degrees of freedom.
double student_t_975(std::size_t dof);

DelayStats summarize(std::span<const RunResult> runs);

// Runs `run(seed)` once per seed, in parallel across up to `threads`
// workers (0 = hardware concurrency), returning results in seed order.
// Duplicate seeds raise ConfigError.
std::vector<RunResult> run_replications(const std::function<RunResult(std::uint64_t)>& run,
                                        std::span<const std::uint64_t> seeds,
                                        unsigned threads = 0);

// seed_base, seed_base + 1, ...
std::vector<std::uint64_t> replication_seeds(std::uint64_t seed_base, std::size_t count);

}  // namespace delaylab
