#include "delaylab/rps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "delaylab/errors.hpp"
#include "delaylab/numeric.hpp"

namespace delaylab {

namespace {

constexpr double kMomentSlack = 1e-12;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

std::string at(std::size_t i, const char* field) {
  return "queues[" + std::to_string(i) + "]." + field;
}

void check_queue(const PolledQueue& q, std::size_t i) {
  const QueueMoments& m = q.arrivals;
  if (!positive_finite(m.a)) throw ValidationError(at(i, "a"), "arrival rate must be > 0");
  if (!positive_finite(m.e)) throw ValidationError(at(i, "e"), "must be > 0");
  if (!positive_finite(m.b)) throw ValidationError(at(i, "b"), "mean batch size must be > 0");
  if (!(m.b2 >= m.b * m.b * (1.0 - kMomentSlack))) {
    throw ValidationError(at(i, "b2"), "batch second moment below mean squared");
  }
  if (m.lambda > 0.0) {
    if (std::fabs(m.a - m.lambda * m.b) > 1e-9 * m.a) {
      throw ValidationError(at(i, "a"), "must equal lambda * b");
    }
    if (std::fabs(m.e - m.lambda * m.b2) > 1e-9 * m.e) {
      throw ValidationError(at(i, "e"), "must equal lambda * b2");
    }
  }
  const ServiceMoments& s = q.service;
  if (!positive_finite(s.p)) throw ValidationError(at(i, "p"), "mean service time must be > 0");
  if (!(s.p2 >= s.p * s.p * (1.0 - kMomentSlack)) || !std::isfinite(s.p2)) {
    throw ValidationError(at(i, "p2"), "service second moment below mean squared");
  }
  if (!(q.gamma > 0.0 && q.gamma <= 1.0)) {
    throw ValidationError(at(i, "gamma"), "polling probability must lie in (0, 1]");
  }
  const SwitchoverMoments& w = q.switchover;
  if (!(w.s >= 0.0) || !std::isfinite(w.s)) {
    throw ValidationError(at(i, "switchover.s"), "must be >= 0");
  }
  if (!(w.s2 >= w.s * w.s * (1.0 - kMomentSlack)) || !std::isfinite(w.s2)) {
    throw ValidationError(at(i, "switchover.s2"), "second moment below mean squared");
  }
}

}  // namespace

QueueMoments batch_poisson_moments(double lambda, double b, double b2) {
  if (!positive_finite(lambda)) throw ValidationError("lambda", "must be > 0");
  if (!positive_finite(b)) throw ValidationError("b", "must be > 0");
  if (!(b2 >= b * b * (1.0 - kMomentSlack)) || !std::isfinite(b2)) {
    throw ValidationError("b2", "invalid batch distribution: second moment below mean squared");
  }
  return QueueMoments{lambda * b, lambda * b2, b, b2, lambda};
}

RpsParams::RpsParams(std::vector<PolledQueue> queues) : queues_(std::move(queues)) {
  if (queues_.empty()) throw ValidationError("queues", "at least one queue required");
  CompensatedSum gamma_total;
  CompensatedSum load;
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    check_queue(queues_[i], i);
    gamma_total += queues_[i].gamma;
    load += queues_[i].arrivals.a * queues_[i].service.p;
  }
  if (std::fabs(gamma_total.value() - 1.0) > 1e-9) {
    throw ValidationError("queues.gamma", "polling probabilities must sum to 1");
  }
  rho_ = load.value();
  if (!(rho_ < 1.0)) throw InstabilityError(rho_);
}

RpsParams RpsParams::uniform_polling(std::span<const QueueMoments> arrivals,
                                     std::span<const ServiceMoments> service) {
  if (arrivals.size() != service.size()) {
    throw ValidationError("queues", "arrival and service vectors differ in length");
  }
  std::vector<PolledQueue> queues(arrivals.size());
  const double gamma = arrivals.empty() ? 0.0 : 1.0 / static_cast<double>(arrivals.size());
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    queues[i] = PolledQueue{arrivals[i], service[i], gamma, {}};
  }
  return RpsParams(std::move(queues));
}

RpsParams RpsParams::with_constant_switchover(double epsilon) const {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon", "must be > 0");
  std::vector<PolledQueue> queues = queues_;
  for (auto& q : queues) q.switchover = SwitchoverMoments{epsilon, epsilon * epsilon};
  return RpsParams(std::move(queues));
}

OfferedLoad offered_load(const RpsParams& params) {
  OfferedLoad load;
  load.per_queue.reserve(params.size());
  CompensatedSum total;
  for (const auto& q : params.queues()) {
    const double r = q.arrivals.a * q.service.p;
    load.per_queue.push_back(r);
    total += r;
  }
  load.total = total.value();
  return load;
}

RpsIntermediates rps_intermediates(const RpsParams& params) {
  const std::size_t n = params.size();
  const double rho = params.rho();
  const double idle = 1.0 - rho;

  CompensatedSum s_acc;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = params[i];
    if (!(q.switchover.s > 0.0)) {
      throw ValidationError(at(i, "switchover.s"),
                            "general formula needs nonzero switchover; use the zero-switchover limit");
    }
    s_acc += q.switchover.s * q.gamma;
  }
  const double s = s_acc.value();

  RpsIntermediates out;
  out.n = n;
  out.mean_switchover = s;
  out.chi.resize(n);
  out.nabla.resize(n * n);
  out.psi.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = params[i];
    const double a = q.arrivals.a;
    out.chi[i] = 1.0 - s * a / q.gamma - rho * s * a / (2.0 * q.gamma * idle);
  }

  // Queue-independent bracket shared by every nabla_ij.
  CompensatedSum common_acc;
  for (const auto& q : params.queues()) {
    common_acc += q.gamma * q.switchover.s2 +
                  (q.service.p2 + 2.0 * q.switchover.s * q.service.p) * q.arrivals.a * s / idle;
  }
  const double common = common_acc.value();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& qi = params[i];
    for (std::size_t j = 0; j < n; ++j) {
      const auto& qj = params[j];
      const double ai = qi.arrivals.a;
      const double aj = qj.arrivals.a;
      // e_ij = 0 off the diagonal.
      const double cross = (i == j) ? qi.arrivals.e + ai : 0.0;
      CompensatedSum v;
      v += ai * aj * common;
      v += s * cross / idle;
      v += -ai * aj * s *
           (qi.switchover.s + qj.switchover.s + qi.service.p + qj.service.p) / idle;
      out.nabla[i * n + j] = v.value();
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = params[i];
    CompensatedSum weighted;
    for (std::size_t l = 0; l < n; ++l) weighted += params[l].service.p * out.nabla[i * n + l];
    out.psi[i] = out.nabla[i * n + i] / (2.0 * q.gamma) +
                 q.arrivals.a / (2.0 * q.gamma * idle) * weighted.value();
  }
  return out;
}

RpsSolution mean_wait_nonzero_switchover(const RpsParams& params) {
  const RpsIntermediates im = rps_intermediates(params);
  const std::size_t n = im.n;
  const double rho = params.rho();
  const double idle = 1.0 - rho;
  const double s = im.mean_switchover;

  for (std::size_t i = 0; i < n; ++i) {
    if (!(im.chi[i] > 0.0)) {
      throw ModelRangeError("chi[" + std::to_string(i) + "] <= 0: switchover too long for this load");
    }
  }

  CompensatedSum numerator;
  CompensatedSum correction;
  for (std::size_t l = 0; l < n; ++l) {
    const auto& q = params[l];
    const double a = q.arrivals.a;
    numerator += q.service.p * im.psi[l] / im.chi[l];
    correction += q.service.p * a * a * s / (2.0 * q.gamma * idle * im.chi[l]);
  }
  const double denominator = 1.0 - correction.value();
  if (!(denominator > 0.0)) {
    throw ModelRangeError("normalizing denominator <= 0: switchover too long for this load");
  }
  const double ratio = numerator.value() / denominator;

  RpsSolution sol;
  sol.rho = rho;
  sol.mean_queue.resize(n);
  sol.prob_nonempty.resize(n);
  sol.mean_wait.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = params[i];
    const double a = q.arrivals.a;
    const double chi = im.chi[i];
    const double eq = im.psi[i] / chi + s * a * a / (2.0 * q.gamma * idle * chi) * ratio;
    const double busy = s * a / (q.gamma * idle);
    if (busy > 1.0) {
      throw ModelRangeError("P{Q_" + std::to_string(i) + " >= 1} = " + std::to_string(busy) +
                            " exceeds 1: switchover too long for this load");
    }
    const double b = q.arrivals.b;
    const double b2 = q.arrivals.b2;
    sol.mean_queue[i] = eq;
    sol.prob_nonempty[i] = busy;
    sol.mean_wait[i] = eq / (a * busy) - (1.0 - a * q.service.p) / a - (b2 - b) / (2.0 * a * b);
  }
  return sol;
}

std::vector<double> mean_delay_zero_switchover(const RpsParams& params) {
  const std::size_t n = params.size();
  const double gamma = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(params[i].gamma - gamma) > 1e-12) {
      throw ValidationError(at(i, "gamma"), "zero-switchover delay requires gamma = 1/n");
    }
  }
  const double idle = 1.0 - params.rho();

  CompensatedSum spread;
  for (const auto& q : params.queues()) {
    spread += (q.service.p2 - q.service.p * q.service.p) * q.arrivals.a;
  }
  const double shared = spread.value() / (2.0 * idle);

  std::vector<double> delay(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = params[i];
    const double a = q.arrivals.a;
    const double e = q.arrivals.e;
    delay[i] = shared + 0.5 * q.service.p * (1.0 + e / (a * idle)) +
               e / (2.0 * a) * (e / a - q.arrivals.b2 / q.arrivals.b);
  }
  return delay;
}

SwitchoverLimitReport switchover_limit_check(const RpsParams& params,
                                             std::span<const double> epsilons) {
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0.0)) throw ValidationError("epsilons", "must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) {
      throw ValidationError("epsilons", "must be strictly decreasing");
    }
  }

  SwitchoverLimitReport report;
  report.zero_switchover = mean_delay_zero_switchover(params);
  const std::size_t n = params.size();

  for (const double eps : epsilons) {
    SwitchoverLimitStep step;
    step.epsilon = eps;
    step.mean_wait = mean_wait_nonzero_switchover(params.with_constant_switchover(eps)).mean_wait;
    step.abs_gap.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      step.abs_gap[i] = std::fabs(step.mean_wait[i] - report.zero_switchover[i]);
      step.max_relative_gap =
          std::max(step.max_relative_gap, step.abs_gap[i] / std::fabs(report.zero_switchover[i]));
      if (!report.steps.empty() && step.abs_gap[i] > report.steps.back().abs_gap[i]) {
        report.monotone = false;
      }
    }
    report.steps.push_back(std::move(step));
  }
  return report;
}

}  // namespace delaylab
