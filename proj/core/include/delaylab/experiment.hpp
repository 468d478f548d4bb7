#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delaylab/app_delay.hpp"
#include "delaylab/mac_model.hpp"
#include "delaylab/sim_stats.hpp"

namespace delaylab {

struct Engines {
  bool analytic = true;
  bool dcf = false;
  bool rps_oracle = false;

  bool any() const noexcept { return analytic || dcf || rps_oracle; }
};

struct RunSettings {
  std::size_t replications = 30;
  std::uint64_t seed = 1;
  std::uint64_t packet_budget = 100000;  // per replication
  double horizon_s = 0.0;                // overrides packet_budget when > 0
  double warmup_fraction = 0.1;
  unsigned threads = 0;
};

// One experiment: a family of scenarios (table rows) that share everything
// but the per-node arrival rates, plus MAC constants and run controls.
struct ExperimentSpec {
  std::string name;
  std::string description;
  std::vector<Scenario> rows;
  MacParams mac;
  RunSettings run;
  Engines engines;
  // True when capacity_pkts_per_s came from the file rather than the
  // renewal-reward model.
  bool capacity_from_file = true;

  void validate() const;
};

struct ComparisonRow {
  std::vector<double> lambda;
  double rho = 0.0;
  double capacity_pkts_per_s = 0.0;
  // Milliseconds. Empty when the engine did not run.
  std::vector<double> analytic_ms;
  double analytic_summary_ms = 0.0;  // arrival-weighted mean over nodes
  std::vector<double> dcf_ms;
  std::vector<double> dcf_ci_ms;
  std::vector<double> rps_ms;
  std::vector<double> rps_ci_ms;
  std::vector<std::string> warnings;
};

struct ComparisonTable {
  std::string name;
  std::size_t nodes = 0;
  double mtu_bytes = 0.0;
  std::string distribution;
  std::string regime;
  std::string moment_mode;
  Engines engines;
  std::size_t replications = 0;
  std::vector<ComparisonRow> rows;
};

// Runs the selected engines over every row. Engine errors are rethrown with
// the row index prepended.
ComparisonTable run_experiment(const ExperimentSpec& spec);

}  // namespace delaylab
