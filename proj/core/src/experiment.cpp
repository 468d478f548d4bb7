#include "delaylab/experiment.hpp"

#include "delaylab/dcf_sim.hpp"
#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

constexpr double kMs = 1e3;

std::string regime_name(Regime r) { return r == Regime::SubMtu ? "sub_mtu" : "super_mtu"; }

std::string mode_name(MomentMode m) {
  return m == MomentMode::Literal ? "literal" : "squared_mean";
}

std::string distribution_label(const Scenario& s) {
  std::string label = describe(s.nodes.front().length);
  for (const auto& n : s.nodes) {
    if (describe(n.length) != label) return "mixed";
  }
  return label;
}

RunControl control_for(const RunSettings& run, std::size_t row) {
  RunControl c;
  c.horizon_s = run.horizon_s;
  c.packet_budget = run.packet_budget;
  c.warmup_fraction = run.warmup_fraction;
  // Rows draw disjoint seed blocks so no seed repeats within the experiment.
  c.seed = run.seed + static_cast<std::uint64_t>(row) * run.replications;
  return c;
}

void fill_simulated(const DelayStats& stats, std::vector<double>& mean_ms,
                    std::vector<double>& ci_ms, std::vector<std::string>& warnings) {
  for (const auto& node : stats.nodes) {
    mean_ms.push_back(node.mean_delay * kMs);
    ci_ms.push_back(node.ci_half_width * kMs);
  }
  warnings.insert(warnings.end(), stats.warnings.begin(), stats.warnings.end());
}

}  // namespace

ComparisonTable run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Scenario& first = spec.rows.front();

  ComparisonTable table;
  table.name = spec.name;
  table.nodes = first.size();
  table.mtu_bytes = first.mtu_bytes;
  table.distribution = distribution_label(first);
  table.regime = regime_name(first.regime);
  table.moment_mode = mode_name(first.moment_mode);
  table.engines = spec.engines;
  table.replications = spec.engines.dcf || spec.engines.rps_oracle ? spec.run.replications : 0;

  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    const Scenario& s = spec.rows[r];
    ComparisonRow row;
    for (const auto& n : s.nodes) row.lambda.push_back(n.lambda);
    row.rho = s.offered_load();
    row.capacity_pkts_per_s = s.capacity_pkts_per_s;

    try {
      if (spec.engines.analytic) {
        const AnalyticDelays d = analytic_delays(s);
        for (const double v : d.d_avg) row.analytic_ms.push_back(v * kMs);
        row.analytic_summary_ms = d.weighted_mean(s) * kMs;
      }
      const RunControl control = control_for(spec.run, r);
      if (spec.engines.dcf) {
        const DelayStats stats =
            run_dcf_simulation(s, spec.mac, control, spec.run.replications, spec.run.threads);
        fill_simulated(stats, row.dcf_ms, row.dcf_ci_ms, row.warnings);
      }
      if (spec.engines.rps_oracle) {
        const DelayStats stats = run_rps_oracle(s, control, spec.run.replications, spec.run.threads);
        fill_simulated(stats, row.rps_ms, row.rps_ci_ms, row.warnings);
      }
    } catch (const ValidationError& e) {
      throw ValidationError("rows[" + std::to_string(r) + "]", e.what());
    } catch (const InstabilityError& e) {
      throw ValidationError("rows[" + std::to_string(r) + "]", e.what());
    } catch (const Error& e) {
      throw Error("rows[" + std::to_string(r) + "]: " + e.what());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace delaylab
