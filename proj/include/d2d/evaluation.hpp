#pragma once

#include <cstdint>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/dnn.hpp"
#include "d2d/objective.hpp"
#include "d2d/topology.hpp"

namespace d2d {

struct EvalScenario {
  TopologyParams topology;
  ChannelParams channel;
  ConstraintConfig constraints;
};

struct EvalReport {
  double mean_eta = 0.0;
  double eta_std = 0.0;
  double mean_total_power_per_tx = 0.0;  // watts
  double pmax_violation_rate = 0.0;      // fraction of transmitters over P_max
  double q_exceed_rate = 0.0;            // fraction of (c, n) entries over Q_max
  long n_drops = 0;
};

// Held-out statistics over fresh drops; forward runs in infer mode.
EvalReport evaluate(const NetworkParams& params, const BatchNormStats& stats,
                    const EvalScenario& scenario, long n_drops, Rng& rng, int threads = 1);

struct RasterPoint {
  double x = 0.0;
  double y = 0.0;
  double mean_dbm = 0.0;
};

struct PowerMapRaster {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double step = 0.0;
  std::vector<RasterPoint> points;  // grid points inside some cell, row by row
};

// Sweeps a probe pair (tx on each grid point, rx rx_offset metres due east)
// over every grid point inside the layout and records the mean output power.
PowerMapRaster power_map(const NetworkParams& params, const BatchNormStats& stats,
                         const CellLayout& layout, double grid_step, double rx_offset);

// Mean raster value over points whose distance to the nearest eNB lies in
// [min_dist, max_dist). NaN when no point qualifies.
double region_mean(const PowerMapRaster& raster, const CellLayout& layout, double min_dist,
                   double max_dist);

inline constexpr double kGridSearchLimit = 1e7;

struct GridSearchResult {
  PowerMatrix best;
  CostBreakdown cost;
  std::uint64_t evaluations = 0;
};

// `count` evenly spaced levels from lo to hi inclusive.
std::vector<double> linear_levels(int count, double lo, double hi);

// Exhaustive search over every K x N matrix with entries from `levels`.
// Candidates are visited in lexicographic order of the row-major power
// vector (levels sorted ascending) and the first minimum wins ties.
GridSearchResult oracle_grid_search(const GainTable& gains, const ConstraintConfig& cfg,
                                    double noise_dbw, Eigen::Index channels,
                                    std::vector<double> levels);

struct DirectOptConfig {
  long iterations = 500;
  double lr = 1.0;  // dB per step
  double init_dbm = -65.0;
  double min_dbm = -150.0;
  double max_dbm = 20.0;
};

struct DirectOptResult {
  PowerMatrix powers;
  CostBreakdown cost;
};

// Projected descent on drop_cost directly over the powers, bypassing the
// network. Steps use Adam moment scaling; each iterate is clipped to
// [min_dbm, max_dbm].
DirectOptResult oracle_direct_opt(const GainTable& gains, const ConstraintConfig& cfg,
                                  double noise_dbw, Eigen::Index channels,
                                  const DirectOptConfig& opt = {});

}  // namespace d2d
