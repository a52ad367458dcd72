#include "d2d/training.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/parallel.hpp"

namespace d2d {

namespace {

template <typename Fn>
void for_each_tensor(NetworkParams& params, const Gradients& grads, Fn&& fn) {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < params.layers.size(); ++j) {
    auto& p = params.layers[j];
    const auto& g = grads.layers[j];
    fn(idx++, p.weights.data(), g.weights.data(), p.weights.size());
    fn(idx++, p.scale.data(), g.scale.data(), p.scale.size());
    fn(idx++, p.shift.data(), g.shift.data(), p.shift.size());
  }
}

}  // namespace

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam lr must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ConfigError("adam beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
}

AdamState make_adam_state(const NetworkParams& params, const AdamConfig& config) {
  config.validate();
  AdamState state;
  state.config = config;
  for (const auto& l : params.layers) {
    for (Eigen::Index size : {l.weights.size(), l.scale.size(), l.shift.size()}) {
      state.m.push_back(Eigen::ArrayXd::Zero(size));
      state.v.push_back(Eigen::ArrayXd::Zero(size));
    }
  }
  return state;
}

void adam_step(AdamState& state, NetworkParams& params, const Gradients& grads) {
  if (grads.layers.size() != params.layers.size() ||
      state.m.size() != 3 * params.layers.size()) {
    throw ShapeError("adam_step: parameter, gradient and state layouts differ");
  }
  const auto& c = state.config;
  ++state.step;
  const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for_each_tensor(params, grads, [&](std::size_t idx, double* theta, const double* g,
                                     Eigen::Index size) {
    if (state.m[idx].size() != size) throw ShapeError("adam_step: tensor size mismatch");
    Eigen::Map<Eigen::ArrayXd> t(theta, size);
    const Eigen::Map<const Eigen::ArrayXd> grad(g, size);
    auto& m = state.m[idx];
    auto& v = state.v[idx];
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.square();
    t -= c.lr * (m / bias1) / ((v / bias2).sqrt() + c.epsilon);
  });
}

BatchGradient grad_batch_cost(const NetworkParams& params, const Batch& batch,
                              const std::vector<GainTable>& gains, const ConstraintConfig& cfg,
                              double noise_dbw, int threads) {
  if (gains.size() != batch.size()) {
    throw ShapeError("grad_batch_cost: " + std::to_string(batch.size()) + " drops but " +
                     std::to_string(gains.size()) + " gain tables");
  }
  const Eigen::MatrixXd coords = flatten_batch(batch);
  const auto k = static_cast<Eigen::Index>(batch.pairs_per_drop());
  const auto bn = batch.size();

  BatchGradient out;
  ForwardResult fwd = forward(params, coords, Mode::train, BatchNormStats{});
  out.powers_dbm = std::move(fwd.powers_dbm);
  out.cache = std::move(fwd.cache);

  std::vector<CostGradient> per_drop(bn);
  parallel_for(bn, threads, [&](std::size_t i) {
    const auto start = static_cast<Eigen::Index>(i) * k;
    per_drop[i] = drop_cost_gradient(gains[i], out.powers_dbm.middleRows(start, k), cfg, noise_dbw);
  });

  const double inv_bn = 1.0 / static_cast<double>(bn);
  Eigen::MatrixXd d_powers(out.powers_dbm.rows(), out.powers_dbm.cols());
  out.drops.reserve(bn);
  for (std::size_t i = 0; i < bn; ++i) {
    out.cost += per_drop[i].cost.total;
    out.drops.push_back(per_drop[i].cost);
    d_powers.middleRows(static_cast<Eigen::Index>(i) * k, k) = per_drop[i].d_power_dbm * inv_bn;
  }
  out.cost *= inv_bn;
  out.grads = backward(params, out.cache, d_powers);
  return out;
}

double network_batch_cost(const NetworkParams& params, const Eigen::MatrixXd& coordinates,
                          std::size_t pairs_per_drop, const std::vector<GainTable>& gains,
                          const ConstraintConfig& cfg, double noise_dbw) {
  const Eigen::MatrixXd powers =
      forward(params, coordinates, Mode::train, BatchNormStats{}).powers_dbm;
  const auto k = static_cast<Eigen::Index>(pairs_per_drop);
  std::vector<PowerMatrix> per_drop;
  for (Eigen::Index start = 0; start < powers.rows(); start += k) {
    per_drop.emplace_back(powers.middleRows(start, k));
  }
  return batch_cost(gains, per_drop, cfg, noise_dbw);
}

void TrainConfig::validate() const {
  if (n_epoch < 1) throw ConfigError("train.n_epoch must be >= 1");
  if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  if (log_every < 1) throw ConfigError("train.log_every must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  adam.validate();
  network.validate();
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) {
    throw ConfigError("network.bn_momentum must lie in (0, 1)");
  }
  constraints.validate();
  channel.validate();
  topology.validate();
}

TrainResult train(const TrainConfig& cfg, const BatchSource& source,
                  const MetricsCallback& on_record) {
  cfg.validate();
  const Rng root(cfg.seed);
  Rng init_rng = root.split(0);
  Rng topo_rng = root.split(1);
  Rng channel_rng = root.split(2);

  const CellLayout layout = build_hex_layout(cfg.topology.cells, cfg.topology.radius);
  const int channels = cfg.network.output_size;
  const BatchSource sample = source ? source : BatchSource([&](Rng& rng) {
    return sample_batch(layout, cfg.topology.pairs_per_cell, cfg.topology.d_max, cfg.batch_size,
                        rng);
  });

  TrainResult result;
  result.params = init_network(cfg.network, init_rng);
  result.stats = init_stats(cfg.network, cfg.bn_momentum);
  AdamState adam = make_adam_state(result.params, cfg.adam);
  const double q_max = cfg.constraints.q_max_w();

  for (long it = 1; it <= cfg.n_epoch; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    const Batch batch = sample(topo_rng);
    std::vector<GainTable> gains;
    gains.reserve(batch.size());
    for (const auto& drop : batch.drops) {
      gains.push_back(build_gain_table(drop, cfg.channel, channel_rng, channels));
    }

    BatchGradient step;
    try {
      step = grad_batch_cost(result.params, batch, gains, cfg.constraints, cfg.channel.noise_dbw,
                             cfg.threads);
    } catch (const NumericError& e) {
      throw DivergenceError(std::string("numeric failure: ") + e.what(), it);
    }
    if (!std::isfinite(step.cost)) throw DivergenceError("non-finite cost", it);

    update_running_stats(result.stats, step.cache);
    adam_step(adam, result.params, step.grads);
    if (!result.params.all_finite()) throw DivergenceError("non-finite parameters", it);

    if (it % cfg.log_every != 0 && it != cfg.n_epoch) continue;

    const auto k = static_cast<Eigen::Index>(batch.pairs_per_drop());
    const auto bn = static_cast<double>(batch.size());
    MetricsRecord rec;
    rec.iteration = it;
    rec.cost_total = step.cost;
    Eigen::Index pmax_viol = 0;
    Eigen::Index q_exceed = 0;
    Eigen::Index q_entries = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& d = step.drops[i];
      rec.mean_eta += d.sum_throughput / static_cast<double>(k * channels);
      rec.ct_p += d.ct_p;
      rec.ct_if += d.ct_if;
      const PowerMatrix p = step.powers_dbm.middleRows(static_cast<Eigen::Index>(i) * k, k);
      pmax_viol += count_pmax_violations(p, cfg.constraints.p_max_w);
      const Eigen::MatrixXd enb_if = enb_interference(gains[i], p);
      q_exceed += count_q_exceedances(enb_if, q_max);
      q_entries += enb_if.size();
    }
    rec.mean_eta /= bn;
    rec.ct_p /= bn;
    rec.ct_if /= bn;
    rec.pmax_violation_rate = static_cast<double>(pmax_viol) / (bn * static_cast<double>(k));
    rec.q_exceed_rate = static_cast<double>(q_exceed) / static_cast<double>(q_entries);
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(rec);
    if (on_record) on_record(rec);
  }
  return result;
}

}  // namespace d2d
