#include "d2d/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/parallel.hpp"
#include "d2d/units.hpp"

namespace d2d {

EvalReport evaluate(const NetworkParams& params, const BatchNormStats& stats,
                    const EvalScenario& scenario, long n_drops, Rng& rng, int threads) {
  if (n_drops < 1) throw ConfigError("evaluation needs at least one drop");
  scenario.topology.validate();
  scenario.channel.validate();
  scenario.constraints.validate();
  const auto& topo = scenario.topology;
  const CellLayout layout = build_hex_layout(topo.cells, topo.radius);
  const Eigen::Index channels = params.config.output_size;

  // Sampling stays sequential so the stream order never depends on threads.
  std::vector<Drop> drops;
  std::vector<GainTable> gains;
  drops.reserve(static_cast<std::size_t>(n_drops));
  gains.reserve(static_cast<std::size_t>(n_drops));
  for (long i = 0; i < n_drops; ++i) {
    drops.push_back(sample_drop(layout, topo.pairs_per_cell, topo.d_max, rng));
    gains.push_back(build_gain_table(drops.back(), scenario.channel, rng,
                                     static_cast<int>(channels)));
  }

  struct PerDrop {
    double eta = 0.0;
    double power_w = 0.0;
    Eigen::Index pmax_viol = 0;
    Eigen::Index q_exceed = 0;
    Eigen::Index q_entries = 0;
  };
  std::vector<PerDrop> results(drops.size());
  const double q_max = scenario.constraints.q_max_w();
  parallel_for(drops.size(), threads, [&](std::size_t i) {
    const PowerMatrix p = predict(params, stats, pair_coordinates(drops[i]));
    const Eigen::VectorXd t = throughput(gains[i], p, scenario.channel.noise_dbw);
    const Eigen::MatrixXd enb_if = enb_interference(gains[i], p);
    auto& r = results[i];
    r.eta = spectral_efficiency(t, p.rows(), channels);
    r.power_w = p.unaryExpr([](double v) { return dbm_to_watt(v); }).sum();
    r.pmax_viol = count_pmax_violations(p, scenario.constraints.p_max_w);
    r.q_exceed = count_q_exceedances(enb_if, q_max);
    r.q_entries = enb_if.size();
  });

  EvalReport rep;
  rep.n_drops = n_drops;
  double eta_sq = 0.0;
  double total_power = 0.0;
  Eigen::Index tx_count = 0;
  Eigen::Index pmax_viol = 0;
  Eigen::Index q_exceed = 0;
  Eigen::Index q_entries = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    rep.mean_eta += r.eta;
    eta_sq += r.eta * r.eta;
    total_power += r.power_w;
    tx_count += static_cast<Eigen::Index>(drops[i].pair_count());
    pmax_viol += r.pmax_viol;
    q_exceed += r.q_exceed;
    q_entries += r.q_entries;
  }
  const auto n = static_cast<double>(n_drops);
  rep.mean_eta /= n;
  rep.eta_std = std::sqrt(std::max(0.0, eta_sq / n - rep.mean_eta * rep.mean_eta));
  rep.mean_total_power_per_tx = total_power / static_cast<double>(tx_count);
  rep.pmax_violation_rate = static_cast<double>(pmax_viol) / static_cast<double>(tx_count);
  rep.q_exceed_rate = static_cast<double>(q_exceed) / static_cast<double>(q_entries);
  return rep;
}

PowerMapRaster power_map(const NetworkParams& params, const BatchNormStats& stats,
                         const CellLayout& layout, double grid_step, double rx_offset) {
  if (!(grid_step > 0.0)) throw ConfigError("power map grid step must be positive");
  const double r = layout.radius;
  const double half_height = 0.5 * std::numbers::sqrt3 * r;
  PowerMapRaster raster;
  raster.step = grid_step;
  raster.x_min = raster.y_min = std::numeric_limits<double>::infinity();
  raster.x_max = raster.y_max = -std::numeric_limits<double>::infinity();
  for (const auto& c : layout.centers) {
    raster.x_min = std::min(raster.x_min, c.x - r);
    raster.x_max = std::max(raster.x_max, c.x + r);
    raster.y_min = std::min(raster.y_min, c.y - half_height);
    raster.y_max = std::max(raster.y_max, c.y + half_height);
  }

  const auto nx = static_cast<long>(std::floor((raster.x_max - raster.x_min) / grid_step)) + 1;
  const auto ny = static_cast<long>(std::floor((raster.y_max - raster.y_min) / grid_step)) + 1;
  for (long iy = 0; iy < ny; ++iy) {
    for (long ix = 0; ix < nx; ++ix) {
      const Point p{raster.x_min + static_cast<double>(ix) * grid_step,
                    raster.y_min + static_cast<double>(iy) * grid_step};
      const bool inside = std::any_of(layout.centers.begin(), layout.centers.end(),
                                      [&](Point c) { return in_hexagon(p, c, r); });
      if (inside) raster.points.push_back({p.x, p.y, 0.0});
    }
  }

  // Infer mode treats rows independently, so probes can be stacked.
  constexpr std::size_t kChunk = 4096;
  for (std::size_t start = 0; start < raster.points.size(); start += kChunk) {
    const std::size_t end = std::min(raster.points.size(), start + kChunk);
    Eigen::MatrixXd probes(static_cast<Eigen::Index>(end - start), 4);
    for (std::size_t i = start; i < end; ++i) {
      const auto& pt = raster.points[i];
      probes.row(static_cast<Eigen::Index>(i - start)) << pt.x, pt.y, pt.x + rx_offset, pt.y;
    }
    const Eigen::MatrixXd out = predict(params, stats, probes);
    for (std::size_t i = start; i < end; ++i) {
      raster.points[i].mean_dbm = out.row(static_cast<Eigen::Index>(i - start)).mean();
    }
  }
  return raster;
}

double region_mean(const PowerMapRaster& raster, const CellLayout& layout, double min_dist,
                   double max_dist) {
  double sum = 0.0;
  long count = 0;
  for (const auto& pt : raster.points) {
    const double d = distance_to_nearest_center(layout, {pt.x, pt.y});
    if (d >= min_dist && d < max_dist) {
      sum += pt.mean_dbm;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> linear_levels(int count, double lo, double hi) {
  if (count < 1) throw ConfigError("need at least one power level");
  if (count == 1) return {hi};
  std::vector<double> levels(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    levels[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return levels;
}

GridSearchResult oracle_grid_search(const GainTable& gains, const ConstraintConfig& cfg,
                                    double noise_dbw, Eigen::Index channels,
                                    std::vector<double> levels) {
  if (levels.empty()) throw ConfigError("grid search needs at least one level");
  if (channels < 1) throw ShapeError("grid search needs at least one channel");
  const Eigen::Index k = gains.pair_count();
  const Eigen::Index dims = k * channels;
  const double space =
      std::pow(static_cast<double>(levels.size()), static_cast<double>(dims));
  if (space > kGridSearchLimit) {
    throw SearchSpaceError("grid search space " + std::to_string(levels.size()) + "^" +
                           std::to_string(dims) + " exceeds the 1e7 candidate limit");
  }
  std::sort(levels.begin(), levels.end());

  // Odometer over row-major entries; the last entry varies fastest, which
  // walks candidates in lexicographic order.
  std::vector<std::size_t> digit(static_cast<std::size_t>(dims), 0);
  PowerMatrix candidate = PowerMatrix::Constant(k, channels, levels.front());
  GridSearchResult best;
  best.cost.total = std::numeric_limits<double>::infinity();
  while (true) {
    const CostBreakdown c = drop_cost(gains, candidate, cfg, noise_dbw);
    ++best.evaluations;
    if (c.total < best.cost.total) {
      best.cost = c;
      best.best = candidate;
    }
    Eigen::Index pos = dims - 1;
    while (pos >= 0) {
      auto& d = digit[static_cast<std::size_t>(pos)];
      if (++d < levels.size()) {
        candidate(pos / channels, pos % channels) = levels[d];
        break;
      }
      d = 0;
      candidate(pos / channels, pos % channels) = levels.front();
      --pos;
    }
    if (pos < 0) break;
  }
  return best;
}

DirectOptResult oracle_direct_opt(const GainTable& gains, const ConstraintConfig& cfg,
                                  double noise_dbw, Eigen::Index channels,
                                  const DirectOptConfig& opt) {
  if (opt.iterations < 0) throw ConfigError("direct optimisation iterations must be >= 0");
  if (!(opt.lr > 0.0)) throw ConfigError("direct optimisation lr must be positive");
  const Eigen::Index k = gains.pair_count();
  PowerMatrix p = PowerMatrix::Constant(k, channels, opt.init_dbm);
  Eigen::ArrayXXd m = Eigen::ArrayXXd::Zero(k, channels);
  Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(k, channels);
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-12;
  for (long t = 1; t <= opt.iterations; ++t) {
    const Eigen::ArrayXXd g = drop_cost_gradient(gains, p, cfg, noise_dbw).d_power_dbm.array();
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.square();
    const double b1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double b2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    p.array() -= opt.lr * (m / b1) / ((v / b2).sqrt() + eps);
    p = p.cwiseMax(opt.min_dbm).cwiseMin(opt.max_dbm);
  }
  return {p, drop_cost(gains, p, cfg, noise_dbw)};
}

}  // namespace d2d
