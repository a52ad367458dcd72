#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "d2d/random.hpp"

namespace d2d {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

// Hexagonal multi-cell layout. Hexagons are flat-topped: each has a vertex
// on the +x axis of its center, radius is center-to-vertex.
struct CellLayout {
  std::vector<Point> centers;
  double radius = 500.0;

  int cell_count() const { return static_cast<int>(centers.size()); }

  friend bool operator==(const CellLayout&, const CellLayout&) = default;
};

// Supported counts are 1, 3 (mutually adjacent) and 7 (center plus ring).
CellLayout build_hex_layout(int cells, double radius);

bool in_hexagon(Point p, Point center, double radius);

// Index of the cell whose center is closest to p.
int nearest_cell(const CellLayout& layout, Point p);
double distance_to_nearest_center(const CellLayout& layout, Point p);

struct D2DPair {
  Point tx;
  Point rx;
  int home_cell = 0;

  friend bool operator==(const D2DPair&, const D2DPair&) = default;
};

struct Drop {
  CellLayout layout;
  std::vector<D2DPair> pairs;

  std::size_t pair_count() const { return pairs.size(); }

  friend bool operator==(const Drop&, const Drop&) = default;
};

struct Batch {
  std::vector<Drop> drops;

  std::size_t size() const { return drops.size(); }
  std::size_t pairs_per_drop() const { return drops.empty() ? 0 : drops.front().pair_count(); }

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct TopologyParams {
  int cells = 3;
  double radius = 500.0;
  int pairs_per_cell = 8;
  double d_max = 100.0;

  void validate() const;
  int pair_count() const { return cells * pairs_per_cell; }
};

// Transmitters uniform inside their home hexagon; each receiver at a
// distance Uniform[0, d_max] and a uniform bearing from its transmitter.
Drop sample_drop(const CellLayout& layout, int pairs_per_cell, double d_max, Rng& rng);

Batch sample_batch(const CellLayout& layout, int pairs_per_cell, double d_max, int drops,
                   Rng& rng);

// Row i*K + j holds pair j of drop i as [tx_x, tx_y, rx_x, rx_y].
Eigen::MatrixXd flatten_batch(const Batch& batch);
Eigen::MatrixXd pair_coordinates(const Drop& drop);

// Inverse of flatten_batch: one K x 4 block per drop.
std::vector<Eigen::MatrixXd> unflatten_coordinates(const Eigen::MatrixXd& rows,
                                                   std::size_t pairs_per_drop);

}  // namespace d2d
