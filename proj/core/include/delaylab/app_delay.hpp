#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "delaylab/distributions.hpp"
#include "delaylab/rps.hpp"

namespace delaylab {

// Packets no longer than the MTU travel whole; longer ones are fragmented
// into MTU-sized units and reassembled at the destination.
enum class Regime { SubMtu, SuperMtu };

// How the normalized second moment enters the closed forms. SquaredMean
// replaces omega2 by omega^2, which is the reading under which the published
// exponential super-MTU tables are reproduced.
enum class MomentMode { Literal, SquaredMean };

struct NodeSpec {
  double lambda = 0.0;  // application packets/s
  PacketLengthDist length = Deterministic{1500.0};
};

struct Scenario {
  std::vector<NodeSpec> nodes;
  double mtu_bytes = 1500.0;
  double capacity_pkts_per_s = 0.0;  // MTU-sized packets per second
  Regime regime = Regime::SubMtu;
  MomentMode moment_mode = MomentMode::Literal;

  std::size_t size() const noexcept { return nodes.size(); }

  // Service time of one MTU, P / C.
  double mtu_service_time() const { return 1.0 / capacity_pkts_per_s; }

  // Normalized moments after applying `moment_mode`.
  NormalizedMoments moments(std::size_t node) const;

  // sum_i lambda_i omega_i P / C.
  double offered_load() const;

  // Node list, MTU, capacity, distributions and regime/support consistency.
  void validate_structure(const std::string& path = "scenario") const;
  // validate_structure plus stability (InstabilityError when rho >= 1).
  void validate(const std::string& path = "scenario") const;
};

struct AnalyticDelays {
  std::vector<double> d_avg;           // per node, s
  std::vector<double> fragment_delay;  // super-MTU only
  std::vector<double> cycle_time;      // super-MTU only, d_i - P/C
  double rho = 0.0;

  // Mean over nodes weighted by arrival rate.
  double weighted_mean(const Scenario& s) const;
};

RpsParams sub_mtu_rps_params(const Scenario& scenario);
RpsParams super_mtu_rps_params(const Scenario& scenario);

AnalyticDelays mean_delay_sub_mtu(const Scenario& scenario);

// Mean delay of one fragment at node i.
double fragment_delay(const Scenario& scenario, std::size_t node);

AnalyticDelays mean_delay_super_mtu(const Scenario& scenario);

// Packet delay rebuilt from the fragment delay:
//   ((omega + 1)/2) d_i - ((omega - 1)/2) P/C
double packet_delay_from_fragment(double fragment_delay, double omega, double mtu_service_time);

// Dispatches on scenario.regime.
AnalyticDelays analytic_delays(const Scenario& scenario);

}  // namespace delaylab
