#include <algorithm>
#include <cmath>

#include "d2d/errors.hpp"
#include "d2d/training.hpp"

namespace d2d {

GradCheckReport finite_difference_check(const NetworkParams& params, const Batch& batch,
                                        const std::vector<GainTable>& gains,
                                        const ConstraintConfig& cfg, double noise_dbw,
                                        double step, double tolerance) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  const BatchGradient analytic = grad_batch_cost(params, batch, gains, cfg, noise_dbw);
  const Eigen::MatrixXd coords = flatten_batch(batch);
  const std::size_t k = batch.pairs_per_drop();

  GradCheckReport report;
  report.tolerance = tolerance;
  NetworkParams probe = params;

  auto check_tensor = [&](double* values, const double* grad, Eigen::Index size) {
    for (Eigen::Index i = 0; i < size; ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = network_batch_cost(probe, coords, k, gains, cfg, noise_dbw);
      values[i] = saved - step;
      const double down = network_batch_cost(probe, coords, k, gains, cfg, noise_dbw);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grad[i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
      report.max_error = std::max(report.max_error, err);
      ++report.checked;
      if (!(err < tolerance)) ++report.failed;
    }
  };

  for (std::size_t j = 0; j < probe.layers.size(); ++j) {
    auto& l = probe.layers[j];
    const auto& g = analytic.grads.layers[j];
    check_tensor(l.weights.data(), g.weights.data(), l.weights.size());
    check_tensor(l.scale.data(), g.scale.data(), l.scale.size());
    check_tensor(l.shift.data(), g.shift.data(), l.shift.size());
  }
  return report;
}

}  // namespace d2d
