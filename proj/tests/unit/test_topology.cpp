#include <doctest.h>

#include <cmath>
#include <numbers>

#include "d2d/errors.hpp"
#include "d2d/topology.hpp"

using namespace d2d;

namespace {
const double kSpacing = std::numbers::sqrt3 * 500.0;
}

TEST_CASE("single cell sits at the origin") {
  const CellLayout l = build_hex_layout(1, 500.0);
  REQUIRE(l.cell_count() == 1);
  CHECK(l.centers[0] == Point{0.0, 0.0});
}

TEST_CASE("seven-cell ring neighbours are sqrt(3) R from the center") {
  const CellLayout l = build_hex_layout(7, 500.0);
  REQUIRE(l.cell_count() == 7);
  for (int c = 1; c < 7; ++c) {
    CHECK(distance(l.centers[0], l.centers[c]) == doctest::Approx(kSpacing).epsilon(1e-12));
    // consecutive ring cells are adjacent too
    const int next = c == 6 ? 1 : c + 1;
    CHECK(distance(l.centers[c], l.centers[next]) == doctest::Approx(kSpacing).epsilon(1e-12));
  }
  CHECK(kSpacing == doctest::Approx(866.03).epsilon(1e-5));
}

TEST_CASE("three cells are mutually adjacent") {
  const CellLayout l = build_hex_layout(3, 500.0);
  REQUIRE(l.cell_count() == 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      CHECK(distance(l.centers[a], l.centers[b]) == doctest::Approx(kSpacing).epsilon(1e-12));
    }
  }
}

TEST_CASE("adjacent hexagons tile without overlap") {
  // The shared edge midpoint lies in both cells, a point just past it in one.
  const CellLayout l = build_hex_layout(7, 500.0);
  for (int c = 1; c < 7; ++c) {
    const Point mid{0.5 * l.centers[c].x, 0.5 * l.centers[c].y};
    CHECK(in_hexagon(mid, l.centers[0], 500.0));
    CHECK(in_hexagon(mid, l.centers[c], 500.0));
    const Point beyond{0.51 * l.centers[c].x, 0.51 * l.centers[c].y};
    CHECK_FALSE(in_hexagon(beyond, l.centers[0], 500.0));
  }
}

TEST_CASE("unsupported cell counts are configuration errors") {
  CHECK_THROWS_AS(build_hex_layout(2, 500.0), ConfigError);
  CHECK_THROWS_AS(build_hex_layout(19, 500.0), ConfigError);
  CHECK_THROWS_AS(build_hex_layout(7, 0.0), ConfigError);
}

TEST_CASE("hexagon predicate") {
  CHECK(in_hexagon({500.0, 0.0}, {0, 0}, 500.0));  // vertex on +x
  CHECK_FALSE(in_hexagon({0.0, 500.0}, {0, 0}, 500.0));  // flat top at 433 m
  CHECK(in_hexagon({0.0, 433.0}, {0, 0}, 500.0));
  CHECK_FALSE(in_hexagon({501.0, 0.0}, {0, 0}, 500.0));
}

TEST_CASE("sampled drops satisfy placement invariants") {
  for (int cells : {1, 3, 7}) {
    const CellLayout l = build_hex_layout(cells, 500.0);
    Rng rng(42 + static_cast<unsigned>(cells));
    for (int rep = 0; rep < 50; ++rep) {
      const Drop d = sample_drop(l, 8, 100.0, rng);
      REQUIRE(d.pair_count() == static_cast<std::size_t>(8 * cells));
      for (const auto& p : d.pairs) {
        CHECK(in_hexagon(p.tx, l.centers[p.home_cell], 500.0));
        CHECK(distance(p.tx, p.rx) <= 100.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("zero D_max colocates receivers") {
  const CellLayout l = build_hex_layout(1, 500.0);
  Rng rng(5);
  const Drop d = sample_drop(l, 8, 0.0, rng);
  for (const auto& p : d.pairs) CHECK(p.tx == p.rx);
}

TEST_CASE("mean tx-rx distance approaches D_max / 2") {
  // Monte-Carlo oracle over 1e5 pairs.
  const CellLayout l = build_hex_layout(1, 500.0);
  Rng rng(2024);
  double sum = 0.0;
  long n = 0;
  while (n < 100000) {
    const Drop d = sample_drop(l, 100, 100.0, rng);
    for (const auto& p : d.pairs) {
      sum += distance(p.tx, p.rx);
      ++n;
    }
  }
  CHECK(std::abs(sum / n - 50.0) / 50.0 < 0.01);
}

TEST_CASE("batch sampling is deterministic and sized") {
  const CellLayout l = build_hex_layout(3, 500.0);
  Rng a(9);
  Rng b(9);
  const Batch x = sample_batch(l, 8, 100.0, 50, a);
  const Batch y = sample_batch(l, 8, 100.0, 50, b);
  CHECK(x.size() == 50);
  CHECK(x == y);
  Rng c(10);
  CHECK_FALSE(sample_batch(l, 8, 100.0, 50, c) == x);
  CHECK_THROWS_AS(sample_batch(l, 8, 100.0, 0, c), ConfigError);
}

TEST_CASE("flatten orders rows by drop then pair") {
  const CellLayout l = build_hex_layout(3, 500.0);
  Rng rng(3);
  const Batch batch = sample_batch(l, 8, 100.0, 50, rng);
  const Eigen::MatrixXd rows = flatten_batch(batch);
  REQUIRE(rows.rows() == 1200);
  REQUIRE(rows.cols() == 4);
  const auto& p = batch.drops[7].pairs[5];
  CHECK(rows(7 * 24 + 5, 0) == p.tx.x);
  CHECK(rows(7 * 24 + 5, 1) == p.tx.y);
  CHECK(rows(7 * 24 + 5, 2) == p.rx.x);
  CHECK(rows(7 * 24 + 5, 3) == p.rx.y);

  const auto blocks = unflatten_coordinates(rows, 24);
  REQUIRE(blocks.size() == 50);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    CHECK(blocks[i] == pair_coordinates(batch.drops[i]));
  }
}

TEST_CASE("single pair flattens to its own coordinates") {
  Batch b;
  Drop d;
  d.layout = build_hex_layout(1, 500.0);
  d.pairs.push_back({{1.0, 2.0}, {3.0, 4.0}, 0});
  b.drops.push_back(d);
  const Eigen::MatrixXd rows = flatten_batch(b);
  REQUIRE(rows.rows() == 1);
  CHECK(rows(0, 0) == 1.0);
  CHECK(rows(0, 3) == 4.0);
  CHECK_THROWS_AS(flatten_batch(Batch{}), ShapeError);
}

TEST_CASE("split streams are reproducible and distinct") {
  const Rng root(77);
  Rng a = root.split(1);
  Rng b = root.split(1);
  Rng c = root.split(2);
  const auto va = a.next_u64();
  CHECK(va == b.next_u64());
  CHECK(va != c.next_u64());
}
