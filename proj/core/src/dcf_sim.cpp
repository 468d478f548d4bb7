#include "delaylab/dcf_sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <sstream>

#include "delaylab/errors.hpp"
#include "delaylab/event_queue.hpp"

namespace delaylab {

namespace {

// Stream identifiers for Rng::derive.
constexpr std::uint64_t kMacStream = 0;
constexpr std::uint64_t kArrivalStreamBase = 1000;
constexpr std::uint64_t kLengthStreamBase = 2000;
constexpr std::uint64_t kServerStream = 3000;

struct Packet {
  double arrival = 0.0;
  double bytes = 0.0;
  std::uint32_t fragments = 1;
  std::uint32_t sent = 0;  // fragments already delivered
  double min_delay = 0.0;
};

std::uint32_t fragment_count(double bytes, double mtu_bytes) {
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(bytes / mtu_bytes)));
}

double fragment_bits(const Packet& p, double mtu_bytes) {
  if (p.sent + 1 < p.fragments) return 8.0 * mtu_bytes;
  return 8.0 * (p.bytes - mtu_bytes * static_cast<double>(p.fragments - 1));
}

double total_rate(const Scenario& s) {
  double r = 0.0;
  for (const auto& n : s.nodes) r += n.lambda;
  return r;
}

std::vector<std::string> stability_warnings(const Scenario& s) {
  std::vector<std::string> out;
  const double rho = s.offered_load();
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "analytic offered load rho = " << rho << " >= 1; delays will not settle";
    out.push_back(os.str());
  }
  return out;
}

struct DcfNode {
  std::deque<Packet> fifo;
  int stage = 0;
  std::uint64_t counter = 0;
  std::optional<Packet> in_flight;  // last fragment on the air
};

class DcfKernel {
 public:
  DcfKernel(const Scenario& scenario, const MacParams& mac, const RunControl& control,
            double horizon, bool saturated, const TraceSink& trace)
      : scenario_(scenario),
        mac_(mac),
        horizon_(horizon),
        saturated_(saturated),
        trace_(trace),
        mac_rng_(Rng::derive(control.seed, kMacStream)),
        nodes_(scenario.size()) {
    const double window_start = control.warmup_fraction * horizon;
    result_.seed = control.seed;
    result_.window_start = window_start;
    result_.window_end = horizon;
    for (std::size_t i = 0; i < scenario.size(); ++i) {
      accounting_.emplace_back(window_start, horizon);
      arrival_rng_.emplace_back(Rng::derive(control.seed, kArrivalStreamBase + i));
      length_rng_.emplace_back(Rng::derive(control.seed, kLengthStreamBase + i));
    }
  }

  RunResult run() {
    if (saturated_) {
      for (std::uint32_t i = 0; i < nodes_.size(); ++i) enqueue_packet(i, 0.0);
      schedule_boundary(0.0);
    } else {
      for (std::uint32_t i = 0; i < nodes_.size(); ++i) schedule_arrival(i, 0.0);
    }

    while (!events_.empty() && events_.top().time <= horizon_) {
      const SimEvent e = events_.pop();
      switch (e.kind) {
        case EventKind::Arrival:
          on_arrival(e);
          break;
        case EventKind::TransmissionEnd:
          on_transmission_end(e);
          break;
        case EventKind::SlotBoundary:
          on_boundary(e.time);
          break;
      }
    }

    for (auto& acc : accounting_) result_.nodes.push_back(acc.finish(horizon_));
    return std::move(result_);
  }

 private:
  void schedule_arrival(std::uint32_t node, double now) {
    const double t = now + next_interarrival(scenario_.nodes[node].lambda, arrival_rng_[node]);
    if (t <= horizon_) events_.push({t, EventKind::Arrival, node});
  }

  void schedule_boundary(double t) {
    channel_busy_ = true;
    events_.push({t, EventKind::SlotBoundary, 0});
  }

  void draw_backoff(DcfNode& n) {
    const std::uint64_t window = (std::uint64_t{1} << n.stage) * static_cast<std::uint64_t>(mac_.W);
    n.counter = mac_rng_.below(window);
  }

  void enqueue_packet(std::uint32_t i, double t) {
    DcfNode& n = nodes_[i];
    Packet p;
    p.arrival = t;
    p.bytes = sample_length(scenario_.nodes[i].length, length_rng_[i]);
    p.fragments = fragment_count(p.bytes, scenario_.mtu_bytes);
    for (std::uint32_t k = 0; k < p.fragments; ++k) {
      Packet probe = p;
      probe.sent = k;
      p.min_delay += mac_.frame_airtime(fragment_bits(probe, scenario_.mtu_bytes));
    }
    accounting_[i].on_arrival(t);
    const bool was_empty = n.fifo.empty();
    n.fifo.push_back(p);
    if (was_empty) {
      n.stage = 0;
      draw_backoff(n);
    }
  }

  void on_arrival(const SimEvent& e) {
    enqueue_packet(e.node, e.time);
    // Medium idle with nobody contending: the new frame opens a slot grid now.
    if (!channel_busy_) schedule_boundary(e.time);
    schedule_arrival(e.node, e.time);
  }

  void on_transmission_end(const SimEvent& e) {
    DcfNode& n = nodes_[e.node];
    const Packet p = *n.in_flight;
    n.in_flight.reset();
    accounting_[e.node].on_delivery(e.time, p.arrival, p.min_delay, p.fragments);
    if (e.time >= result_.window_start) {
      ++result_.window_deliveries;
      result_.window_delivered_bits += 8.0 * p.bytes;
    }
    if (trace_) trace_(PacketRecord{e.node, p.arrival, e.time, p.bytes, p.fragments});
  }

  void on_boundary(double t) {
    transmitters_.clear();
    std::uint64_t min_counter = UINT64_MAX;
    bool any = false;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      const DcfNode& n = nodes_[i];
      if (n.fifo.empty()) continue;
      any = true;
      if (n.counter == 0) transmitters_.push_back(i);
      min_counter = std::min(min_counter, n.counter);
    }

    if (!any) {
      channel_busy_ = false;
      return;
    }

    if (transmitters_.empty()) {
      // Skip straight to the next boundary at which something can happen:
      // a counter reaching zero or a newly arrived frame joining.
      std::uint64_t skip = min_counter;
      if (!events_.empty() && events_.top().kind == EventKind::Arrival) {
        const double gap = events_.top().time - t;
        const auto until_arrival =
            static_cast<std::uint64_t>(std::max(1.0, std::ceil(gap / mac_.slot_time)));
        skip = std::min(skip, until_arrival);
      }
      for (auto& n : nodes_) {
        if (!n.fifo.empty()) n.counter -= skip;
      }
      result_.idle_slots += skip;
      schedule_boundary(t + static_cast<double>(skip) * mac_.slot_time);
      return;
    }

    if (transmitters_.size() == 1) {
      const std::uint32_t i = transmitters_.front();
      DcfNode& n = nodes_[i];
      Packet& p = n.fifo.front();
      const double bits = fragment_bits(p, scenario_.mtu_bytes);
      ++p.sent;
      ++result_.successes;
      if (p.sent == p.fragments) {
        n.in_flight = p;
        n.fifo.pop_front();
        events_.push({t + mac_.frame_airtime(bits), EventKind::TransmissionEnd, i});
      }
      n.stage = 0;
      if (!n.fifo.empty()) {
        draw_backoff(n);
      } else if (saturated_) {
        enqueue_packet(i, t);
      }
      schedule_boundary(t + mac_.success_duration(bits));
      return;
    }

    double longest = 0.0;
    for (const std::uint32_t i : transmitters_) {
      DcfNode& n = nodes_[i];
      longest = std::max(longest, fragment_bits(n.fifo.front(), scenario_.mtu_bytes));
      n.stage = std::min(n.stage + 1, mac_.m);
      draw_backoff(n);
    }
    ++result_.collisions;
    schedule_boundary(t + mac_.collision_duration(longest));
  }

  const Scenario& scenario_;
  const MacParams& mac_;
  double horizon_;
  bool saturated_;
  const TraceSink& trace_;
  Rng mac_rng_;
  std::vector<Rng> arrival_rng_;
  std::vector<Rng> length_rng_;
  std::vector<DcfNode> nodes_;
  std::vector<NodeAccounting> accounting_;
  std::vector<std::uint32_t> transmitters_;
  EventQueue events_;
  bool channel_busy_ = false;
  RunResult result_;
};

struct PolledNode {
  std::deque<Packet> fifo;
};

class RpsOracleKernel {
 public:
  RpsOracleKernel(const Scenario& scenario, const RunControl& control, double horizon,
                  const TraceSink& trace)
      : scenario_(scenario),
        horizon_(horizon),
        trace_(trace),
        server_rng_(Rng::derive(control.seed, kServerStream)),
        nodes_(scenario.size()),
        unit_(scenario.mtu_service_time()) {
    const double window_start = control.warmup_fraction * horizon;
    result_.seed = control.seed;
    result_.window_start = window_start;
    result_.window_end = horizon;
    for (std::size_t i = 0; i < scenario.size(); ++i) {
      accounting_.emplace_back(window_start, horizon);
      arrival_rng_.emplace_back(Rng::derive(control.seed, kArrivalStreamBase + i));
      length_rng_.emplace_back(Rng::derive(control.seed, kLengthStreamBase + i));
    }
  }

  RunResult run() {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) schedule_arrival(i, 0.0);
    while (!events_.empty() && events_.top().time <= horizon_) {
      const SimEvent e = events_.pop();
      if (e.kind == EventKind::Arrival) {
        on_arrival(e);
      } else {
        on_service_end(e);
      }
    }
    for (auto& acc : accounting_) result_.nodes.push_back(acc.finish(horizon_));
    return std::move(result_);
  }

 private:
  bool super_mtu() const { return scenario_.regime == Regime::SuperMtu; }

  double unit_service(const Packet& p) const {
    return super_mtu() ? unit_ : (p.bytes / scenario_.mtu_bytes) * unit_;
  }

  void schedule_arrival(std::uint32_t node, double now) {
    const double t = now + next_interarrival(scenario_.nodes[node].lambda, arrival_rng_[node]);
    if (t <= horizon_) events_.push({t, EventKind::Arrival, node});
  }

  void on_arrival(const SimEvent& e) {
    const std::uint32_t i = e.node;
    Packet p;
    p.arrival = e.time;
    p.bytes = sample_length(scenario_.nodes[i].length, length_rng_[i]);
    p.fragments = super_mtu() ? fragment_count(p.bytes, scenario_.mtu_bytes) : 1;
    p.min_delay = unit_service(p) * p.fragments;
    accounting_[i].on_arrival(e.time);
    nodes_[i].fifo.push_back(p);
    if (!busy_) start_service(e.time);
    schedule_arrival(i, e.time);
  }

  void start_service(double t) {
    nonempty_.clear();
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].fifo.empty()) nonempty_.push_back(i);
    }
    if (nonempty_.empty()) {
      busy_ = false;
      return;
    }
    const std::uint32_t i = nonempty_[server_rng_.below(nonempty_.size())];
    busy_ = true;
    ++result_.successes;
    events_.push({t + unit_service(nodes_[i].fifo.front()), EventKind::TransmissionEnd, i});
  }

  void on_service_end(const SimEvent& e) {
    PolledNode& n = nodes_[e.node];
    Packet& p = n.fifo.front();
    if (++p.sent == p.fragments) {
      accounting_[e.node].on_delivery(e.time, p.arrival, p.min_delay, p.fragments);
      if (e.time >= result_.window_start) {
        ++result_.window_deliveries;
        result_.window_delivered_bits += 8.0 * p.bytes;
      }
      if (trace_) trace_(PacketRecord{e.node, p.arrival, e.time, p.bytes, p.fragments});
      n.fifo.pop_front();
    }
    start_service(e.time);
  }

  const Scenario& scenario_;
  double horizon_;
  const TraceSink& trace_;
  Rng server_rng_;
  std::vector<Rng> arrival_rng_;
  std::vector<Rng> length_rng_;
  std::vector<PolledNode> nodes_;
  std::vector<NodeAccounting> accounting_;
  std::vector<std::uint32_t> nonempty_;
  EventQueue events_;
  double unit_;
  bool busy_ = false;
  RunResult result_;
};

}  // namespace

RunResult simulate_dcf(const Scenario& scenario, const MacParams& mac, const RunControl& control,
                       const TraceSink& trace) {
  mac.validate();
  scenario.validate_structure();
  const double horizon = control.resolve_horizon(total_rate(scenario));
  DcfKernel kernel(scenario, mac, control, horizon, false, trace);
  RunResult r = kernel.run();
  r.warnings = stability_warnings(scenario);
  return r;
}

RunResult simulate_rps_oracle(const Scenario& scenario, const RunControl& control,
                              const TraceSink& trace) {
  scenario.validate_structure();
  const double horizon = control.resolve_horizon(total_rate(scenario));
  RpsOracleKernel kernel(scenario, control, horizon, trace);
  RunResult r = kernel.run();
  r.warnings = stability_warnings(scenario);
  return r;
}

DelayStats run_dcf_simulation(const Scenario& scenario, const MacParams& mac,
                              const RunControl& control, std::size_t replications,
                              unsigned threads) {
  const auto seeds = replication_seeds(control.seed, replications);
  const auto runs = run_replications(
      [&](std::uint64_t seed) {
        RunControl c = control;
        c.seed = seed;
        return simulate_dcf(scenario, mac, c);
      },
      seeds, threads);
  return summarize(runs);
}

DelayStats run_rps_oracle(const Scenario& scenario, const RunControl& control,
                          std::size_t replications, unsigned threads) {
  const auto seeds = replication_seeds(control.seed, replications);
  const auto runs = run_replications(
      [&](std::uint64_t seed) {
        RunControl c = control;
        c.seed = seed;
        return simulate_rps_oracle(scenario, c);
      },
      seeds, threads);
  return summarize(runs);
}

CapacityEstimate estimate_capacity(const MacParams& mac, int nodes, const PacketLengthDist& length,
                                   double mtu_bytes, const RunControl& control) {
  mac.validate();
  if (nodes < 1) throw ValidationError("nodes", "must be >= 1");
  Scenario s;
  s.mtu_bytes = mtu_bytes;
  s.capacity_pkts_per_s = 1.0;  // unused by the DCF kernel
  s.regime = support(length).second > mtu_bytes ? Regime::SuperMtu : Regime::SubMtu;
  s.nodes.assign(static_cast<std::size_t>(nodes), NodeSpec{1.0, length});
  s.validate_structure();

  double horizon = control.horizon_s;
  if (!(horizon > 0.0)) {
    const double bits = 8.0 * raw_moments(length).mean;
    const double rate = aggregate_capacity(mac, nodes, bits).packets_per_s;
    horizon = control.resolve_horizon(rate);
  }
  RunControl c = control;
  c.horizon_s = horizon;
  c.resolve_horizon(1.0);

  const TraceSink none;
  DcfKernel kernel(s, mac, c, horizon, true, none);
  const RunResult r = kernel.run();

  CapacityEstimate est;
  const double len = r.window_length();
  est.packets_per_s = static_cast<double>(r.window_deliveries) / len;
  est.bits_per_s = r.window_delivered_bits / len;
  est.mtu_packets_per_s = est.bits_per_s / (8.0 * mtu_bytes);
  est.successes = r.successes;
  est.collisions = r.collisions;
  est.idle_slots = r.idle_slots;
  return est;
}

}  // namespace delaylab
