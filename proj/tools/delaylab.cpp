// delaylab: closed-form and simulated application delay for single-cell
// 802.11 DCF networks.
//
//   delaylab analytic <scenario.json> [--format csv|text] [--moment-mode M]
//   delaylab simulate <scenario.json> [--replications N] [--seed S]
//                     [--engine dcf|rps|both] [--packets N] [--trace FILE]
//   delaylab compare  <scenario.json> [--replications N] [--seed S] ...
//   delaylab capacity --nodes N [--bytes B] [--mtu B] [--simulate]
//
// Exit status: 0 on success, 2 on parse/validation failure, 1 otherwise.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "delaylab/dcf_sim.hpp"
#include "delaylab/errors.hpp"
#include "delaylab/mac_model.hpp"
#include "delaylab/report.hpp"
#include "delaylab/scenario_io.hpp"

namespace {

using namespace delaylab;

struct CommonOptions {
  std::string scenario;
  std::string format = "text";
  std::string moment_mode;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> packets;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool simulation) {
  cmd->add_option("scenario", o.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "text"}));
  cmd->add_option("--moment-mode", o.moment_mode, "Override the normalized second-moment reading")
      ->check(CLI::IsMember({"literal", "squared_mean"}));
  if (simulation) {
    cmd->add_option("--replications", o.replications, "Independent replications")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.seed, "Base seed (default: file, then $DELAYLAB_SEED)");
    cmd->add_option("--packets", o.packets, "Expected packets per replication")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  }
}

ExperimentSpec load(const CommonOptions& o) {
  ExperimentSpec spec = load_scenario(o.scenario);
  if (!o.moment_mode.empty()) {
    const MomentMode mode = o.moment_mode == "literal" ? MomentMode::Literal : MomentMode::SquaredMean;
    for (auto& row : spec.rows) row.moment_mode = mode;
  }
  if (o.replications) spec.run.replications = *o.replications;
  if (o.seed) spec.run.seed = *o.seed;
  if (o.packets) {
    spec.run.packet_budget = *o.packets;
    spec.run.horizon_s = 0.0;
  }
  if (o.threads) spec.run.threads = *o.threads;
  spec.validate();
  return spec;
}

void print_capacity(const Capacity& c, double mtu_bytes, const std::optional<CapacityEstimate>& sim,
                    ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::cout << "beta,p,residual,p_success,p_idle,p_collision,bits_per_s,pkts_per_s,mtu_pkts_per_s";
    if (sim) std::cout << ",sim_bits_per_s,sim_pkts_per_s,sim_mtu_pkts_per_s";
    std::cout << '\n';
    std::printf("%.9g,%.9g,%.3g,%.9g,%.9g,%.9g,%.6g,%.6g,%.6g", c.fixed_point.beta, c.fixed_point.p,
                c.fixed_point.residual, c.slots.success, c.slots.idle, c.slots.collision, c.bits_per_s,
                c.packets_per_s, c.units_per_s(8.0 * mtu_bytes));
    if (sim) std::printf(",%.6g,%.6g,%.6g", sim->bits_per_s, sim->packets_per_s, sim->mtu_packets_per_s);
    std::printf("\n");
    return;
  }
  std::printf("attempt probability beta   %.6f\n", c.fixed_point.beta);
  std::printf("collision probability p    %.6f  (residual %.2g)\n", c.fixed_point.p, c.fixed_point.residual);
  std::printf("slot probabilities         success %.4f  idle %.4f  collision %.4f\n", c.slots.success,
              c.slots.idle, c.slots.collision);
  std::printf("renewal-reward capacity    %.1f kb/s  %.2f pkts/s  %.2f MTU pkts/s\n", c.bits_per_s / 1e3,
              c.packets_per_s, c.units_per_s(8.0 * mtu_bytes));
  if (sim) {
    std::printf("saturated DCF simulation   %.1f kb/s  %.2f pkts/s  %.2f MTU pkts/s\n", sim->bits_per_s / 1e3,
                sim->packets_per_s, sim->mtu_packets_per_s);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Application delay modelling for single-cell 802.11 DCF networks", "delaylab"};
  app.require_subcommand(1);

  CommonOptions analytic_opts;
  auto* analytic = app.add_subcommand("analytic", "Closed-form mean delays for every row");
  add_common(analytic, analytic_opts, false);

  CommonOptions simulate_opts;
  std::string engine = "dcf";
  std::string trace_path;
  auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of every row");
  add_common(simulate, simulate_opts, true);
  simulate->add_option("--engine", engine, "Simulator to run")->check(CLI::IsMember({"dcf", "rps", "both"}));
  simulate->add_option("--trace", trace_path, "Per-packet CSV trace of the first replication of each row");

  CommonOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Analytic and simulated delays side by side");
  add_common(compare, compare_opts, true);

  int nodes = 4;
  double bytes = 1500.0;
  double mtu = 1500.0;
  bool saturate = false;
  double horizon = 200.0;
  std::uint64_t cap_seed = 1;
  std::string cap_format = "text";
  auto* capacity = app.add_subcommand("capacity", "Saturation capacity of the cell");
  capacity->add_option("--nodes", nodes, "Contending nodes")->required()->check(CLI::PositiveNumber);
  capacity->add_option("--bytes", bytes, "Packet length in bytes")->check(CLI::PositiveNumber);
  capacity->add_option("--mtu", mtu, "MTU in bytes")->check(CLI::PositiveNumber);
  capacity->add_flag("--simulate", saturate, "Also run a saturated DCF simulation");
  capacity->add_option("--horizon", horizon, "Simulated seconds for --simulate")->check(CLI::PositiveNumber);
  capacity->add_option("--seed", cap_seed, "Seed for --simulate");
  capacity->add_option("--format", cap_format, "Output format")->check(CLI::IsMember({"csv", "text"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analytic) {
      ExperimentSpec spec = load(analytic_opts);
      spec.engines = Engines{true, false, false};
      emit_report(run_experiment(spec), parse_report_format(analytic_opts.format), std::cout);
    } else if (*simulate) {
      ExperimentSpec spec = load(simulate_opts);
      spec.engines = Engines{false, engine != "rps", engine != "dcf"};
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw ConfigError("cannot open trace file '" + trace_path + "'");
        write_trace_header(trace);
        const TraceSink sink = csv_trace_sink(trace);
        for (std::size_t r = 0; r < spec.rows.size(); ++r) {
          RunControl c;
          c.horizon_s = spec.run.horizon_s;
          c.packet_budget = spec.run.packet_budget;
          c.warmup_fraction = spec.run.warmup_fraction;
          c.seed = spec.run.seed + r * spec.run.replications;
          if (spec.engines.dcf) {
            simulate_dcf(spec.rows[r], spec.mac, c, sink);
          } else {
            simulate_rps_oracle(spec.rows[r], c, sink);
          }
        }
      }
      emit_report(run_experiment(spec), parse_report_format(simulate_opts.format), std::cout);
    } else if (*compare) {
      ExperimentSpec spec = load(compare_opts);
      spec.engines.analytic = true;
      if (!spec.engines.dcf && !spec.engines.rps_oracle) spec.engines.dcf = true;
      emit_report(run_experiment(spec), parse_report_format(compare_opts.format), std::cout);
    } else if (*capacity) {
      MacParams mac;
      const Capacity c = aggregate_capacity(mac, nodes, 8.0 * bytes);
      std::optional<CapacityEstimate> sim;
      if (saturate) {
        RunControl control;
        control.horizon_s = horizon;
        control.seed = cap_seed;
        sim = estimate_capacity(mac, nodes, Deterministic{bytes}, mtu, control);
      }
      print_capacity(c, mtu, sim, parse_report_format(cap_format));
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InstabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
