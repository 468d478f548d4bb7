#include "delaylab/app_delay.hpp"

#include <cmath>

#include "delaylab/errors.hpp"
#include "delaylab/numeric.hpp"

namespace delaylab {

NormalizedMoments Scenario::moments(std::size_t node) const {
  NormalizedMoments m = normalized_moments(nodes.at(node).length, mtu_bytes);
  if (moment_mode == MomentMode::SquaredMean) m.omega2 = m.omega * m.omega;
  return m;
}

double Scenario::offered_load() const {
  CompensatedSum load;
  for (std::size_t i = 0; i < nodes.size(); ++i) load += nodes[i].lambda * moments(i).omega;
  return load.value() / capacity_pkts_per_s;
}

void Scenario::validate_structure(const std::string& path) const {
  if (nodes.empty()) throw ValidationError(path + ".nodes", "at least one node required");
  if (!(mtu_bytes > 0.0) || !std::isfinite(mtu_bytes)) {
    throw ValidationError(path + ".mtu_bytes", "must be > 0");
  }
  if (!(capacity_pkts_per_s > 0.0) || !std::isfinite(capacity_pkts_per_s)) {
    throw ValidationError(path + ".capacity_pkts_per_s", "must be > 0");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string node = path + ".nodes[" + std::to_string(i) + "]";
    if (!(nodes[i].lambda > 0.0) || !std::isfinite(nodes[i].lambda)) {
      throw ValidationError(node + ".lambda", "must be > 0");
    }
    delaylab::validate(nodes[i].length, node + ".length");
    // Unbounded supports (exponential) are not checked against the regime.
    const auto [lo, hi] = support(nodes[i].length);
    if (regime == Regime::SubMtu && std::isfinite(hi) && hi > mtu_bytes) {
      throw ValidationError(node + ".length", describe(nodes[i].length) +
                                                  " exceeds the MTU in the sub-MTU regime");
    }
    if (regime == Regime::SuperMtu && std::isfinite(hi) && lo < mtu_bytes) {
      throw ValidationError(node + ".length", describe(nodes[i].length) +
                                                  " falls below the MTU in the super-MTU regime");
    }
  }
}

void Scenario::validate(const std::string& path) const {
  validate_structure(path);
  const double rho = offered_load();
  if (!(rho < 1.0)) throw InstabilityError(rho);
}

double AnalyticDelays::weighted_mean(const Scenario& s) const {
  CompensatedSum num;
  CompensatedSum den;
  for (std::size_t i = 0; i < d_avg.size(); ++i) {
    num += s.nodes[i].lambda * d_avg[i];
    den += s.nodes[i].lambda;
  }
  return num.value() / den.value();
}

RpsParams sub_mtu_rps_params(const Scenario& scenario) {
  scenario.validate();
  const double unit = scenario.mtu_service_time();
  std::vector<QueueMoments> arrivals;
  std::vector<ServiceMoments> service;
  for (std::size_t i = 0; i < scenario.size(); ++i) {
    const NormalizedMoments m = scenario.moments(i);
    // Whole packets: unit batches, service proportional to length.
    arrivals.push_back(batch_poisson_moments(scenario.nodes[i].lambda, 1.0, 1.0));
    service.push_back(ServiceMoments{m.omega * unit, m.omega2 * unit * unit});
  }
  return RpsParams::uniform_polling(arrivals, service);
}

RpsParams super_mtu_rps_params(const Scenario& scenario) {
  scenario.validate();
  const double unit = scenario.mtu_service_time();
  std::vector<QueueMoments> arrivals;
  std::vector<ServiceMoments> service;
  for (std::size_t i = 0; i < scenario.size(); ++i) {
    const NormalizedMoments m = scenario.moments(i);
    // Each packet is a batch of omega fragments, each served in P/C.
    arrivals.push_back(batch_poisson_moments(scenario.nodes[i].lambda, m.omega, m.omega2));
    service.push_back(ServiceMoments{unit, unit * unit});
  }
  return RpsParams::uniform_polling(arrivals, service);
}

AnalyticDelays mean_delay_sub_mtu(const Scenario& scenario) {
  if (scenario.regime != Regime::SubMtu) {
    throw ValidationError("scenario.regime", "sub-MTU delay requested for a super-MTU scenario");
  }
  const RpsParams params = sub_mtu_rps_params(scenario);
  AnalyticDelays out;
  out.rho = params.rho();
  out.d_avg = mean_delay_zero_switchover(params);
  return out;
}

double fragment_delay(const Scenario& scenario, std::size_t node) {
  if (scenario.regime != Regime::SuperMtu) {
    throw ValidationError("scenario.regime", "fragment delay requested for a sub-MTU scenario");
  }
  const RpsParams params = super_mtu_rps_params(scenario);
  return mean_delay_zero_switchover(params).at(node);
}

double packet_delay_from_fragment(double fragment_delay, double omega, double mtu_service_time) {
  return 0.5 * (omega + 1.0) * fragment_delay - 0.5 * (omega - 1.0) * mtu_service_time;
}

AnalyticDelays mean_delay_super_mtu(const Scenario& scenario) {
  if (scenario.regime != Regime::SuperMtu) {
    throw ValidationError("scenario.regime", "super-MTU delay requested for a sub-MTU scenario");
  }
  const RpsParams params = super_mtu_rps_params(scenario);
  const double unit = scenario.mtu_service_time();
  const double rho = params.rho();

  AnalyticDelays out;
  out.rho = rho;
  out.fragment_delay = mean_delay_zero_switchover(params);
  for (std::size_t i = 0; i < scenario.size(); ++i) {
    const NormalizedMoments m = scenario.moments(i);
    const double w = m.omega;
    out.d_avg.push_back(0.25 * unit * (3.0 - w + m.omega2 * (1.0 + w) / (w * (1.0 - rho))));
    out.cycle_time.push_back(out.fragment_delay[i] - unit);
  }
  return out;
}

AnalyticDelays analytic_delays(const Scenario& scenario) {
  return scenario.regime == Regime::SubMtu ? mean_delay_sub_mtu(scenario)
                                           : mean_delay_super_mtu(scenario);
}

}  // namespace delaylab
