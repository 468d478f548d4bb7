#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace delaylab {

// Arrival moments of one queue under the linear-quadratic model
//   E[A(t)] = a t,   E[A(t)^2] = e t + a^2 t^2,
// housed together with the batch description that produced them.
struct QueueMoments {
  double a = 0.0;       // packets/s
  double e = 0.0;       // packets^2/s
  double b = 1.0;       // mean batch size
  double b2 = 1.0;      // second moment of batch size
  double lambda = 0.0;  // batches/s
};

struct ServiceMoments {
  double p = 0.0;   // mean service time, s
  double p2 = 0.0;  // second moment, s^2
};

struct SwitchoverMoments {
  double s = 0.0;   // mean, s
  double s2 = 0.0;  // second moment, s^2
};

// Batch Poisson arrivals: a = lambda b, e = lambda b2.
QueueMoments batch_poisson_moments(double lambda, double b, double b2);

// One queue of a 1-limited random polling system.
struct PolledQueue {
  QueueMoments arrivals;
  ServiceMoments service;
  double gamma = 0.0;  // probability the server polls this queue next
  SwitchoverMoments switchover;
};

// Validated parameter set. Cross-queue arrival correlations are fixed to zero.
class RpsParams {
 public:
  // Throws ValidationError on malformed moments or polling weights and
  // InstabilityError when rho >= 1.
  explicit RpsParams(std::vector<PolledQueue> queues);

  // Equal polling weights 1/n and zero switchover.
  static RpsParams uniform_polling(std::span<const QueueMoments> arrivals,
                                   std::span<const ServiceMoments> service);

  std::size_t size() const noexcept { return queues_.size(); }
  const PolledQueue& operator[](std::size_t i) const { return queues_[i]; }
  std::span<const PolledQueue> queues() const noexcept { return queues_; }

  double rho() const noexcept { return rho_; }

  // Copy with every switchover set to the constant `epsilon`
  // (mean epsilon, second moment epsilon^2).
  RpsParams with_constant_switchover(double epsilon) const;

 private:
  std::vector<PolledQueue> queues_;
  double rho_ = 0.0;
};

struct OfferedLoad {
  std::vector<double> per_queue;
  double total = 0.0;
};

OfferedLoad offered_load(const RpsParams& params);

// Row-major n x n matrix.
struct RpsIntermediates {
  std::size_t n = 0;
  double mean_switchover = 0.0;  // s = sum_j s_j gamma_j
  std::vector<double> chi;
  std::vector<double> nabla;
  std::vector<double> psi;

  double nabla_at(std::size_t i, std::size_t j) const { return nabla[i * n + j]; }
};

// Requires every s_i > 0.
RpsIntermediates rps_intermediates(const RpsParams& params);

struct RpsSolution {
  std::vector<double> mean_queue;     // E[Q_i] at period starts
  std::vector<double> prob_nonempty;  // P{Q_i >= 1}
  std::vector<double> mean_wait;      // E[W_i]
  double rho = 0.0;
};

// Mean waiting times of the 1-limited random polling system with nonzero
// switchover times. Throws ModelRangeError when the switchover is too long
// for the formulas to stay meaningful at this load.
RpsSolution mean_wait_nonzero_switchover(const RpsParams& params);

// Zero-switchover mean delay per queue:
//   sum_l (p2_l - p_l^2) a_l / (2(1 - rho))
//   + (p_i / 2)(1 + e_i / (a_i (1 - rho)))
//   + (e_i / (2 a_i))(e_i / a_i - b2_i / b_i)
// Switchover fields of `params` are ignored.
std::vector<double> mean_delay_zero_switchover(const RpsParams& params);

struct SwitchoverLimitStep {
  double epsilon = 0.0;
  std::vector<double> mean_wait;
  std::vector<double> abs_gap;  // |E[W_i](epsilon) - E[W0_i]|
  double max_relative_gap = 0.0;
};

struct SwitchoverLimitReport {
  std::vector<double> zero_switchover;
  std::vector<SwitchoverLimitStep> steps;
  // Per-queue gaps never increase along the sequence.
  bool monotone = true;
};

// `epsilons` must be positive and strictly decreasing.
SwitchoverLimitReport switchover_limit_check(const RpsParams& params,
                                             std::span<const double> epsilons);

}  // namespace delaylab
