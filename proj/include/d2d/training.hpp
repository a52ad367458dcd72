#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "d2d/channel.hpp"
#include "d2d/dnn.hpp"
#include "d2d/objective.hpp"
#include "d2d/topology.hpp"

namespace d2d {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Moment buffers are kept per tensor in (weights, scale, shift) layer order.
struct AdamState {
  AdamConfig config;
  long step = 0;
  std::vector<Eigen::ArrayXd> m;
  std::vector<Eigen::ArrayXd> v;
};

AdamState make_adam_state(const NetworkParams& params, const AdamConfig& config);

// One bias-corrected Adam update of every parameter.
void adam_step(AdamState& state, NetworkParams& params, const Gradients& grads);

struct BatchGradient {
  double cost = 0.0;
  Gradients grads;
  std::vector<CostBreakdown> drops;
  Eigen::MatrixXd powers_dbm;  // BN*K x N, rows ordered like flatten_batch
  ForwardCache cache;
};

// Batch cost (mean over drops) of a train-mode forward pass and its exact
// gradient with respect to every network parameter.
BatchGradient grad_batch_cost(const NetworkParams& params, const Batch& batch,
                              const std::vector<GainTable>& gains, const ConstraintConfig& cfg,
                              double noise_dbw, int threads = 1);

// Value-only path: train-mode forward followed by drop_cost on every drop.
double network_batch_cost(const NetworkParams& params, const Eigen::MatrixXd& coordinates,
                          std::size_t pairs_per_drop, const std::vector<GainTable>& gains,
                          const ConstraintConfig& cfg, double noise_dbw);

struct TrainConfig {
  long n_epoch = 100000;
  int batch_size = 50;
  AdamConfig adam;
  NetworkConfig network;
  double bn_momentum = 0.99;
  ConstraintConfig constraints;
  ChannelParams channel;
  TopologyParams topology;
  std::uint64_t seed = 1;
  long log_every = 1;
  int threads = 1;

  void validate() const;
};

struct MetricsRecord {
  long iteration = 0;
  double cost_total = 0.0;
  double mean_eta = 0.0;
  double ct_p = 0.0;
  double ct_if = 0.0;
  double pmax_violation_rate = 0.0;
  double q_exceed_rate = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  NetworkParams params;
  BatchNormStats stats;
  std::vector<MetricsRecord> metrics;
};

// Draws the batch for one iteration. The default simulates fresh drops.
using BatchSource = std::function<Batch(Rng&)>;
using MetricsCallback = std::function<void(const MetricsRecord&)>;

// Per iteration: sample batch, build gains, train-mode forward, batch cost,
// gradient, Adam step. Throws DivergenceError on a non-finite cost.
TrainResult train(const TrainConfig& cfg, const BatchSource& source = {},
                  const MetricsCallback& on_record = {});

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double max_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return checked > 0 && failed == 0; }
};

// Compares grad_batch_cost against central differences of
// network_batch_cost under |a - n| / max(1, |a| + |n|).
GradCheckReport finite_difference_check(const NetworkParams& params, const Batch& batch,
                                        const std::vector<GainTable>& gains,
                                        const ConstraintConfig& cfg, double noise_dbw,
                                        double step = 1e-5, double tolerance = 1e-4);

}  // namespace d2d
