#include "d2d/dnn.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

double sigmoid(double h) {
  if (h >= 0.0) return 1.0 / (1.0 + std::exp(-h));
  const double e = std::exp(h);
  return e / (1.0 + e);
}

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

void NetworkConfig::validate() const {
  if (input_size != 4) throw ConfigError("network input_size must be 4");
  if (output_size < 1) throw ConfigError("network output_size (channels) must be >= 1");
  if (width < 1) throw ConfigError("network width must be >= 1");
  if (depth < 1) throw ConfigError("network depth must be >= 1");
  if (!(bn_epsilon > 0.0)) throw ConfigError("network bn_epsilon must be positive");
  if (!(out_min_dbm < out_max_dbm)) throw ConfigError("network out_min_dbm must be < out_max_dbm");
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += static_cast<std::size_t>(l.weights.size() + l.scale.size() + l.shift.size());
  }
  return n;
}

bool NetworkParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weights.allFinite() || !l.scale.allFinite() || !l.shift.allFinite()) return false;
  }
  return true;
}

Gradients Gradients::zeros_like(const NetworkParams& params) {
  Gradients g;
  for (const auto& l : params.layers) {
    g.layers.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
                        Eigen::VectorXd::Zero(l.scale.size()),
                        Eigen::VectorXd::Zero(l.shift.size())});
  }
  return g;
}

bool Gradients::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weights.allFinite() || !l.scale.allFinite() || !l.shift.allFinite()) return false;
  }
  return true;
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& l : layers) {
    if (l.weights.size()) m = std::max(m, l.weights.cwiseAbs().maxCoeff());
    if (l.scale.size()) m = std::max(m, l.scale.cwiseAbs().maxCoeff());
    if (l.shift.size()) m = std::max(m, l.shift.cwiseAbs().maxCoeff());
  }
  return m;
}

double xavier_range(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Eigen::MatrixXd xavier_init(int fan_in, int fan_out, Rng& rng) {
  if (fan_in < 1 || fan_out < 1) throw ConfigError("xavier_init needs positive fan sizes");
  const double r = xavier_range(fan_in, fan_out);
  Eigen::MatrixXd w(fan_in, fan_out);
  // Row-major fill so the draw order matches the checkpoint layout.
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      double v;
      do {
        v = rng.uniform(-r, r);
      } while (v == -r);  // keep the support open
      w(i, j) = v;
    }
  }
  return w;
}

NetworkParams init_network(const NetworkConfig& config, Rng& rng) {
  config.validate();
  NetworkParams params;
  params.config = config;
  for (int j = 0; j < config.layer_count(); ++j) {
    const int out = config.fan_out(j);
    params.layers.push_back({xavier_init(config.fan_in(j), out, rng),
                             Eigen::VectorXd::Ones(out), Eigen::VectorXd::Zero(out)});
  }
  return params;
}

BatchNormStats init_stats(const NetworkConfig& config, double momentum) {
  if (!(momentum > 0.0 && momentum < 1.0)) {
    throw ConfigError("batch-norm momentum must lie in (0, 1)");
  }
  BatchNormStats stats;
  stats.momentum = momentum;
  for (int j = 0; j < config.layer_count(); ++j) {
    stats.mean.push_back(Eigen::VectorXd::Zero(config.fan_out(j)));
    stats.var.push_back(Eigen::VectorXd::Ones(config.fan_out(j)));
  }
  return stats;
}

ForwardResult forward(const NetworkParams& params, const Eigen::MatrixXd& inputs, Mode mode,
                      const BatchNormStats& stats) {
  const auto& cfg = params.config;
  const Eigen::Index rows = inputs.rows();
  if (inputs.cols() != cfg.input_size) {
    throw ShapeError("forward expects " + std::to_string(cfg.input_size) + " input columns, got " +
                     std::to_string(inputs.cols()));
  }
  if (mode == Mode::train && rows < 2) {
    throw ShapeError("train-mode forward needs at least 2 rows for batch statistics");
  }
  if (rows < 1) throw ShapeError("forward needs at least one input row");
  if (mode == Mode::infer && stats.mean.size() != params.layers.size()) {
    throw ShapeError("running statistics do not match the network depth");
  }
  if (!inputs.allFinite()) throw NumericError("non-finite network input", 0);

  ForwardResult result;
  result.cache.mode = mode;
  result.cache.layers.resize(params.layers.size());
  Eigen::MatrixXd x = inputs;

  for (std::size_t j = 0; j < params.layers.size(); ++j) {
    const auto& layer = params.layers[j];
    auto& lc = result.cache.layers[j];
    const auto layer_index = static_cast<std::ptrdiff_t>(j);

    Eigen::MatrixXd a = x * layer.weights;
    if (!finite(a)) throw NumericError("non-finite pre-activation", layer_index);

    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd var;
    if (mode == Mode::train) {
      mean = a.colwise().mean();
      var = (a.rowwise() - mean).array().square().colwise().mean();
      lc.batch_mean = mean.transpose();
      lc.batch_var = var.transpose();
    } else {
      mean = stats.mean[j].transpose();
      var = stats.var[j].transpose();
    }
    lc.inv_std = (var.array() + cfg.bn_epsilon).rsqrt().matrix().transpose();
    lc.normalized = (a.rowwise() - mean).array().rowwise() * lc.inv_std.transpose().array();

    Eigen::MatrixXd h = (lc.normalized.array().rowwise() * layer.scale.transpose().array())
                            .rowwise() +
                        layer.shift.transpose().array();
    lc.activation = h.unaryExpr(&sigmoid);
    if (!finite(lc.activation)) throw NumericError("non-finite activation", layer_index);

    lc.input = std::move(x);
    x = lc.activation;
  }

  const double lo = cfg.out_min_dbm;
  const double hi = cfg.out_max_dbm;
  const double lo_in = std::nextafter(lo, hi);
  const double hi_in = std::nextafter(hi, lo);
  result.powers_dbm = (x.array() * (hi - lo) + lo).matrix();
  result.cache.clamped.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
      double& p = result.powers_dbm(i, n);
      const bool out = p < lo_in || p > hi_in;
      result.cache.clamped(i, n) = out;
      if (out) p = p < lo_in ? lo_in : hi_in;
    }
  }
  return result;
}

Eigen::MatrixXd predict(const NetworkParams& params, const BatchNormStats& stats,
                        const Eigen::MatrixXd& inputs) {
  return forward(params, inputs, Mode::infer, stats).powers_dbm;
}

void update_running_stats(BatchNormStats& stats, const ForwardCache& cache) {
  if (cache.mode != Mode::train) return;
  const double m = stats.momentum;
  for (std::size_t j = 0; j < cache.layers.size(); ++j) {
    stats.mean[j] = m * stats.mean[j] + (1.0 - m) * cache.layers[j].batch_mean;
    stats.var[j] = m * stats.var[j] + (1.0 - m) * cache.layers[j].batch_var;
  }
}

Gradients backward(const NetworkParams& params, const ForwardCache& cache,
                   const Eigen::MatrixXd& d_powers) {
  const auto& cfg = params.config;
  const auto& last = cache.layers.back();
  if (d_powers.rows() != last.activation.rows() || d_powers.cols() != last.activation.cols()) {
    throw ShapeError("power gradient shape does not match the forward pass");
  }

  Gradients grads;
  grads.layers.resize(params.layers.size());
  const double span = cfg.out_max_dbm - cfg.out_min_dbm;
  Eigen::MatrixXd d_act = (d_powers.array() * span * (!cache.clamped).cast<double>()).matrix();

  for (std::size_t jj = params.layers.size(); jj-- > 0;) {
    const auto& layer = params.layers[jj];
    const auto& lc = cache.layers[jj];
    auto& g = grads.layers[jj];
    const auto rows = static_cast<double>(lc.activation.rows());

    const Eigen::ArrayXXd y = lc.activation.array();
    const Eigen::ArrayXXd d_h = d_act.array() * y * (1.0 - y);
    g.scale = (d_h * lc.normalized.array()).colwise().sum().transpose();
    g.shift = d_h.colwise().sum().transpose();
    const Eigen::ArrayXXd d_norm = d_h.rowwise() * layer.scale.transpose().array();

    Eigen::MatrixXd d_a;
    if (cache.mode == Mode::train) {
      // Includes the paths through the batch mean and variance.
      const Eigen::RowVectorXd sum_d = d_norm.colwise().sum().matrix();
      const Eigen::RowVectorXd sum_dx =
          (d_norm * lc.normalized.array()).colwise().sum().matrix();
      const Eigen::ArrayXXd centered =
          (rows * d_norm).rowwise() - sum_d.array() -
          lc.normalized.array().rowwise() * sum_dx.array();
      d_a = (centered.rowwise() * (lc.inv_std.transpose().array() / rows)).matrix();
    } else {
      d_a = (d_norm.rowwise() * lc.inv_std.transpose().array()).matrix();
    }

    g.weights = lc.input.transpose() * d_a;
    if (!g.weights.allFinite() || !g.scale.allFinite() || !g.shift.allFinite()) {
      throw NumericError("non-finite gradient", static_cast<std::ptrdiff_t>(jj));
    }
    if (jj > 0) d_act = d_a * layer.weights.transpose();
  }
  return grads;
}

}  // namespace d2d
