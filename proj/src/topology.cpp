#include "d2d/topology.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kSqrt3 = std::numbers::sqrt3;

Point offset(Point origin, double dist, double bearing_deg) {
  const double rad = bearing_deg * std::numbers::pi / 180.0;
  return {origin.x + dist * std::cos(rad), origin.y + dist * std::sin(rad)};
}

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void TopologyParams::validate() const {
  if (cells != 1 && cells != 3 && cells != 7) {
    throw ConfigError("topology.cells must be 1, 3 or 7, got " + std::to_string(cells));
  }
  if (!(radius > 0.0)) throw ConfigError("topology.radius_m must be positive");
  if (pairs_per_cell < 1) throw ConfigError("topology.pairs_per_cell must be >= 1");
  if (!(d_max >= 0.0)) throw ConfigError("topology.d_max_m must be non-negative");
}

CellLayout build_hex_layout(int cells, double radius) {
  if (!(radius > 0.0)) throw ConfigError("cell radius must be positive");
  CellLayout layout;
  layout.radius = radius;
  layout.centers.push_back({0.0, 0.0});
  // Flat-top hexagons share edges across the 30 + 60k degree bearings.
  const double spacing = kSqrt3 * radius;
  switch (cells) {
    case 1:
      break;
    case 3:
      layout.centers.push_back(offset({0.0, 0.0}, spacing, 30.0));
      layout.centers.push_back(offset({0.0, 0.0}, spacing, 90.0));
      break;
    case 7:
      for (int k = 0; k < 6; ++k) {
        layout.centers.push_back(offset({0.0, 0.0}, spacing, 30.0 + 60.0 * k));
      }
      break;
    default:
      throw ConfigError("unsupported cell count " + std::to_string(cells) +
                        " (expected 1, 3 or 7)");
  }
  return layout;
}

bool in_hexagon(Point p, Point center, double radius) {
  const double dx = std::abs(p.x - center.x);
  const double dy = std::abs(p.y - center.y);
  const double half_height = 0.5 * kSqrt3 * radius;
  return dy <= half_height && kSqrt3 * dx + dy <= kSqrt3 * radius;
}

int nearest_cell(const CellLayout& layout, Point p) {
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int c = 0; c < layout.cell_count(); ++c) {
    const double d = distance(p, layout.centers[c]);
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

double distance_to_nearest_center(const CellLayout& layout, Point p) {
  return distance(p, layout.centers[nearest_cell(layout, p)]);
}

Drop sample_drop(const CellLayout& layout, int pairs_per_cell, double d_max, Rng& rng) {
  if (pairs_per_cell < 1) throw ConfigError("pairs_per_cell must be >= 1");
  if (!(d_max >= 0.0)) throw ConfigError("d_max must be non-negative");
  Drop drop;
  drop.layout = layout;
  drop.pairs.reserve(static_cast<std::size_t>(pairs_per_cell) * layout.centers.size());
  const double r = layout.radius;
  const double half_height = 0.5 * kSqrt3 * r;
  for (int c = 0; c < layout.cell_count(); ++c) {
    const Point center = layout.centers[c];
    for (int j = 0; j < pairs_per_cell; ++j) {
      Point tx;
      do {
        tx = {center.x + rng.uniform(-r, r), center.y + rng.uniform(-half_height, half_height)};
      } while (!in_hexagon(tx, center, r));
      const double dist = rng.uniform(0.0, d_max);
      const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Point rx{tx.x + dist * std::cos(bearing), tx.y + dist * std::sin(bearing)};
      drop.pairs.push_back({tx, rx, c});
    }
  }
  return drop;
}

Batch sample_batch(const CellLayout& layout, int pairs_per_cell, double d_max, int drops,
                   Rng& rng) {
  if (drops < 1) throw ConfigError("batch size must be >= 1");
  Batch batch;
  batch.drops.reserve(static_cast<std::size_t>(drops));
  for (int i = 0; i < drops; ++i) {
    batch.drops.push_back(sample_drop(layout, pairs_per_cell, d_max, rng));
  }
  return batch;
}

Eigen::MatrixXd pair_coordinates(const Drop& drop) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(drop.pairs.size()), 4);
  for (std::size_t j = 0; j < drop.pairs.size(); ++j) {
    const auto& p = drop.pairs[j];
    rows.row(static_cast<Eigen::Index>(j)) << p.tx.x, p.tx.y, p.rx.x, p.rx.y;
  }
  return rows;
}

Eigen::MatrixXd flatten_batch(const Batch& batch) {
  if (batch.drops.empty()) throw ShapeError("cannot flatten an empty batch");
  const auto k = static_cast<Eigen::Index>(batch.pairs_per_drop());
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(batch.size()) * k, 4);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<Eigen::Index>(batch.drops[i].pair_count()) != k) {
      throw ShapeError("batch drops have differing pair counts");
    }
    rows.middleRows(static_cast<Eigen::Index>(i) * k, k) = pair_coordinates(batch.drops[i]);
  }
  return rows;
}

std::vector<Eigen::MatrixXd> unflatten_coordinates(const Eigen::MatrixXd& rows,
                                                   std::size_t pairs_per_drop) {
  const auto k = static_cast<Eigen::Index>(pairs_per_drop);
  if (k == 0 || rows.cols() != 4 || rows.rows() % k != 0) {
    throw ShapeError("coordinate rows do not reshape into [BN, K, 4]");
  }
  std::vector<Eigen::MatrixXd> blocks;
  for (Eigen::Index start = 0; start < rows.rows(); start += k) {
    blocks.emplace_back(rows.middleRows(start, k));
  }
  return blocks;
}

}  // namespace d2d
