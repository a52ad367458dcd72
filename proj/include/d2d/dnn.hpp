#pragma once

#include <vector>

#include <Eigen/Dense>

#include "d2d/random.hpp"

namespace d2d {

// Shared per-pair power allocation network: `depth` hidden layers of `width`
// units plus an output layer of `output_size` units. Every layer is
// bias-free dense -> batch normalization -> learned scale/shift -> sigmoid;
// the final sigmoid is rescaled onto [out_min_dbm, out_max_dbm].
struct NetworkConfig {
  int input_size = 4;
  int output_size = 8;
  int width = 1500;
  int depth = 7;
  double bn_epsilon = 1e-5;
  double out_min_dbm = -150.0;
  double out_max_dbm = 20.0;

  void validate() const;
  int layer_count() const { return depth + 1; }
  int fan_in(int layer) const { return layer == 0 ? input_size : width; }
  int fan_out(int layer) const { return layer == depth ? output_size : width; }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct LayerParams {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::VectorXd scale;    // S, initialized to 1
  Eigen::VectorXd shift;    // Z, initialized to 0
};

struct NetworkParams {
  NetworkConfig config;
  std::vector<LayerParams> layers;

  std::size_t parameter_count() const;
  bool all_finite() const;
};

// Exponential running statistics for inference-mode normalization.
struct BatchNormStats {
  std::vector<Eigen::VectorXd> mean;
  std::vector<Eigen::VectorXd> var;
  double momentum = 0.99;
};

// Same layout as NetworkParams; holds d(cost)/d(theta).
struct Gradients {
  std::vector<LayerParams> layers;

  static Gradients zeros_like(const NetworkParams& params);
  bool all_finite() const;
  double max_abs() const;
};

double xavier_range(int fan_in, int fan_out);
// Entries i.i.d. Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)).
Eigen::MatrixXd xavier_init(int fan_in, int fan_out, Rng& rng);

NetworkParams init_network(const NetworkConfig& config, Rng& rng);
BatchNormStats init_stats(const NetworkConfig& config, double momentum = 0.99);

enum class Mode { train, infer };

struct LayerCache {
  Eigen::MatrixXd input;       // X fed into the layer
  Eigen::MatrixXd normalized;  // A-hat
  Eigen::VectorXd inv_std;
  Eigen::VectorXd batch_mean;  // train mode only
  Eigen::VectorXd batch_var;   // train mode only, biased estimator
  Eigen::MatrixXd activation;  // sigmoid output
};

struct ForwardCache {
  Mode mode = Mode::infer;
  std::vector<LayerCache> layers;
  // Outputs pinned just inside the power range; their derivative is zero.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> clamped;
};

struct ForwardResult {
  Eigen::MatrixXd powers_dbm;  // B x output_size
  ForwardCache cache;
};

// Pure: train mode normalizes over the B rows of X (B >= 2) and leaves
// `stats` untouched; infer mode normalizes with `stats`.
ForwardResult forward(const NetworkParams& params, const Eigen::MatrixXd& inputs, Mode mode,
                      const BatchNormStats& stats);

Eigen::MatrixXd predict(const NetworkParams& params, const BatchNormStats& stats,
                        const Eigen::MatrixXd& inputs);

// Folds the batch statistics of a train-mode pass into the running estimates.
void update_running_stats(BatchNormStats& stats, const ForwardCache& cache);

// Reverse pass: gradient of a scalar cost given d(cost)/d(powers_dbm).
Gradients backward(const NetworkParams& params, const ForwardCache& cache,
                   const Eigen::MatrixXd& d_powers);

}  // namespace d2d
