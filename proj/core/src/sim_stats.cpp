#include "delaylab/sim_stats.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <exception>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "delaylab/errors.hpp"
#include "delaylab/numeric.hpp"

namespace delaylab {

double RunControl::resolve_horizon(double total_rate) const {
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
    throw ValidationError("run.warmup_fraction", "must lie in [0, 1)");
  }
  if (horizon_s > 0.0) return horizon_s;
  if (packet_budget == 0) {
    throw ValidationError("run", "either horizon_s or packet_budget must be positive");
  }
  if (!(total_rate > 0.0)) throw ValidationError("run", "total arrival rate must be positive");
  return static_cast<double>(packet_budget) / total_rate;
}

void write_trace_header(std::ostream& out) {
  out << "node,arrival_time_s,delivery_time_s,bytes,fragments\n";
}

TraceSink csv_trace_sink(std::ostream& out) {
  return [&out](const PacketRecord& r) {
    const auto old = out.precision(17);
    out << r.node << ',' << r.arrival_time_s << ',' << r.delivery_time_s << ',' << r.bytes << ','
        << r.fragments << '\n';
    out.precision(old);
  };
}

bool RunResult::conserved() const {
  return std::all_of(nodes.begin(), nodes.end(), [](const NodeRunStats& s) {
    return s.arrived == s.delivered + s.in_system_end;
  });
}

double RunResult::little_max_relative_error() const {
  const double len = window_length();
  double worst = 0.0;
  for (const auto& s : nodes) {
    if (s.samples == 0 || s.queue_area <= 0.0) continue;
    const double mean_population = s.queue_area / len;
    const double rate = static_cast<double>(s.window_arrivals) / len;
    worst = std::max(worst, std::fabs(mean_population - rate * s.mean_delay()) / mean_population);
  }
  return worst;
}

void NodeAccounting::advance(double t) {
  const double lo = std::max(last_change_, window_start_);
  const double hi = std::min(t, window_end_);
  if (hi > lo) stats_.queue_area += static_cast<double>(population_) * (hi - lo);
  last_change_ = t;
}

void NodeAccounting::on_arrival(double t) {
  advance(t);
  ++population_;
  ++stats_.arrived;
  if (t >= window_start_ && t <= window_end_) ++stats_.window_arrivals;
}

void NodeAccounting::on_delivery(double t, double arrival_time, double min_delay, std::uint32_t clock_steps) {
  advance(t);
  --population_;
  ++stats_.delivered;
  const double delay = t - arrival_time;
  // Slack for the rounding of t - arrival_time at large clock values.
  const double slack = 4.0 * (1.0 + clock_steps) * std::numeric_limits<double>::epsilon() * std::fabs(t);
  if (delay + slack < min_delay) ++stats_.lower_bound_violations;
  if (arrival_time >= window_start_ && t <= window_end_) {
    ++stats_.samples;
    stats_.delay_sum += delay;
    stats_.delay_sq_sum += delay * delay;
    stats_.delay_min = std::min(stats_.delay_min, delay);
    stats_.delay_max = std::max(stats_.delay_max, delay);
  }
}

NodeRunStats NodeAccounting::finish(double horizon) {
  advance(horizon);
  stats_.in_system_end = population_;
  return stats_;
}

double student_t_975(std::size_t dof) {
  static constexpr std::array<double, 30> table = {
      12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
      2.262157,  2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
      2.109816,  2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
      2.059539,  2.055529, 2.051831, 2.048407, 2.045230, 2.042272};
  if (dof == 0) return std::numeric_limits<double>::quiet_NaN();
  if (dof <= table.size()) return table[dof - 1];
  // Cornish-Fisher expansion around the normal quantile.
  const double z = 1.959963984540054;
  const double v = static_cast<double>(dof);
  const double z2 = z * z;
  const double z3 = z2 * z;
  const double z5 = z3 * z2;
  const double z7 = z5 * z2;
  const double z9 = z7 * z2;
  return z + (z3 + z) / (4 * v) + (5 * z5 + 16 * z3 + 3 * z) / (96 * v * v) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * v * v * v) +
         (79 * z9 + 776 * z7 + 1482 * z5 - 1920 * z3 - 945 * z) / (92160 * v * v * v * v);
}

namespace {

struct MeanSpread {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSpread mean_spread(const std::vector<double>& xs) {
  MeanSpread out;
  if (xs.empty()) return out;
  CompensatedSum sum;
  for (double x : xs) sum += x;
  out.mean = sum.value() / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (double x : xs) sq += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(sq.value() / static_cast<double>(xs.size() - 1));
  }
  return out;
}

}  // namespace

DelayStats summarize(std::span<const RunResult> runs) {
  DelayStats out;
  if (runs.empty()) return out;
  const std::size_t n = runs.front().nodes.size();
  const std::size_t r = runs.size();
  const double t_quantile = student_t_975(r - 1);
  const double root_r = std::sqrt(static_cast<double>(r));

  out.replications = r;
  out.nodes.resize(n);

  std::vector<double> aggregate_per_run(r, 0.0);
  std::vector<double> weight_per_run(r, 0.0);
  CompensatedSum pkts_rate;
  CompensatedSum bits_rate;

  for (std::size_t k = 0; k < r; ++k) {
    const RunResult& run = runs[k];
    out.seeds.push_back(run.seed);
    out.conservation_ok = out.conservation_ok && run.conserved();
    out.little_max_relative_error =
        std::max(out.little_max_relative_error, run.little_max_relative_error());
    pkts_rate += static_cast<double>(run.window_deliveries) / run.window_length();
    bits_rate += run.window_delivered_bits / run.window_length();
    for (const auto& w : run.warnings) {
      if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) {
        out.warnings.push_back(w);
      }
    }
  }
  out.delivered_pkts_per_s = pkts_rate.value() / static_cast<double>(r);
  out.delivered_bits_per_s = bits_rate.value() / static_cast<double>(r);

  for (std::size_t i = 0; i < n; ++i) {
    NodeDelaySummary& s = out.nodes[i];
    std::vector<double> means;
    CompensatedSum throughput;
    CompensatedSum population;
    s.min_delay = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < r; ++k) {
      const NodeRunStats& ns = runs[k].nodes[i];
      const double len = runs[k].window_length();
      s.samples += ns.samples;
      out.lower_bound_violations += ns.lower_bound_violations;
      throughput += static_cast<double>(ns.samples) / len;
      population += ns.queue_area / len;
      if (ns.samples > 0) {
        means.push_back(ns.mean_delay());
        s.min_delay = std::min(s.min_delay, ns.delay_min);
        const double rate = static_cast<double>(ns.window_arrivals);
        aggregate_per_run[k] += rate * ns.mean_delay();
        weight_per_run[k] += rate;
      }
    }
    const MeanSpread ms = mean_spread(means);
    s.mean_delay = ms.mean;
    s.between_sd = ms.sd;
    s.standard_error = means.size() > 1 ? ms.sd / std::sqrt(static_cast<double>(means.size())) : 0.0;
    s.ci_half_width = means.size() > 1 ? student_t_975(means.size() - 1) * s.standard_error
                                       : std::numeric_limits<double>::quiet_NaN();
    s.throughput_pkts_per_s = throughput.value() / static_cast<double>(r);
    s.mean_queue_length = population.value() / static_cast<double>(r);
  }

  std::vector<double> aggregates;
  for (std::size_t k = 0; k < r; ++k) {
    if (weight_per_run[k] > 0.0) aggregates.push_back(aggregate_per_run[k] / weight_per_run[k]);
  }
  const MeanSpread agg = mean_spread(aggregates);
  out.aggregate_mean = agg.mean;
  out.aggregate_standard_error = r > 1 ? agg.sd / root_r : 0.0;
  out.aggregate_ci_half_width =
      r > 1 ? t_quantile * out.aggregate_standard_error : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<std::uint64_t> replication_seeds(std::uint64_t seed_base, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t k = 0; k < count; ++k) seeds[k] = seed_base + k;
  return seeds;
}

std::vector<RunResult> run_replications(const std::function<RunResult(std::uint64_t)>& run,
                                        std::span<const std::uint64_t> seeds, unsigned threads) {
  if (seeds.empty()) throw ConfigError("at least one replication required");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) {
    throw ConfigError("seed reused across replications of one experiment");
  }

  std::vector<RunResult> results(seeds.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, seeds.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= seeds.size()) return;
      try {
        results[k] = run(seeds[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace delaylab
