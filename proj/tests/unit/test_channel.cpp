#include <doctest.h>

#include <cmath>

#include "d2d/channel.hpp"
#include "d2d/units.hpp"

using namespace d2d;

namespace {

ChannelParams no_shadow() {
  ChannelParams p;
  p.shadowing = false;
  return p;
}

Drop single_pair(Point tx, Point rx, int cells = 1) {
  Drop d;
  d.layout = build_hex_layout(cells, 500.0);
  d.pairs.push_back({tx, rx, 0});
  return d;
}

}  // namespace

TEST_CASE("path loss formula and clamp") {
  const ChannelParams p = no_shadow();
  CHECK(path_loss_db(1.0, p) == doctest::Approx(30.0));
  CHECK(path_loss_db(0.0, p) == path_loss_db(1.0, p));
  CHECK(path_loss_db(0.3, p) == path_loss_db(1.0, p));
  CHECK(path_loss_db(100.0, 30.0, 40.0, 1.0) == doctest::Approx(110.0));
}

TEST_CASE("path loss is non-decreasing in distance") {
  const ChannelParams p = no_shadow();
  double prev = path_loss_db(0.0, p);
  for (double d = 0.0; d < 2000.0; d += 0.37) {
    const double pl = path_loss_db(d, p);
    CHECK(pl >= prev);
    prev = pl;
  }
}

TEST_CASE("unshadowed gains follow the formula") {
  const ChannelParams p = no_shadow();
  Rng rng(1);
  const GainTable g = build_gain_table(single_pair({100.0, 0.0}, {150.0, 0.0}), p, rng);
  CHECK(g.flat());
  CHECK(g.d2d_db(0)(0, 0) == doctest::Approx(-(30.0 + 40.0 * std::log10(50.0))).epsilon(1e-14));
  CHECK(g.enb_db(0)(0, 0) == doctest::Approx(-110.0).epsilon(1e-14));
}

TEST_CASE("gain table bound and purity without shadowing") {
  const ChannelParams p = no_shadow();
  const CellLayout l = build_hex_layout(7, 500.0);
  Rng drop_rng(11);
  const Drop d = sample_drop(l, 8, 100.0, drop_rng);
  Rng r1(1);
  Rng r2(999);
  const GainTable a = build_gain_table(d, p, r1);
  const GainTable b = build_gain_table(d, p, r2);
  CHECK(a.d2d[0] == b.d2d[0]);
  CHECK(a.enb[0] == b.enb[0]);
  CHECK(a.d2d[0].allFinite());
  CHECK(a.d2d[0].maxCoeff() <= -path_loss_db(p.d0_m, p));
  CHECK(a.enb[0].maxCoeff() <= -path_loss_db(p.d0_m, p));
  CHECK(a.d2d[0].rows() == 56);
  CHECK(a.enb[0].cols() == 7);
}

TEST_CASE("mirrored pairs see equal eNB gain") {
  const ChannelParams p = no_shadow();
  Drop d;
  d.layout = build_hex_layout(1, 500.0);
  d.pairs.push_back({{120.0, 40.0}, {130.0, 40.0}, 0});
  d.pairs.push_back({{-120.0, -40.0}, {-130.0, -40.0}, 0});
  Rng rng(1);
  const GainTable g = build_gain_table(d, p, rng);
  CHECK(g.enb_db(0)(0, 0) == doctest::Approx(g.enb_db(0)(1, 0)).epsilon(1e-14));
}

TEST_CASE("shadowing spread matches sigma") {
  // Monte-Carlo oracle: 1e5 draws of one link.
  ChannelParams p;
  const Drop d = single_pair({100.0, 0.0}, {150.0, 0.0});
  Rng rng(31337);
  const double mean_gain = -path_loss_db(50.0, p);
  double s = 0.0;
  double s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = build_gain_table(d, p, rng).d2d_db(0)(0, 0) - mean_gain;
    s += v;
    s2 += v * v;
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  CHECK(std::abs(sd - 8.0) / 8.0 < 0.02);
  CHECK(std::abs(mean) < 0.1);
}

TEST_CASE("per-channel shadowing produces one layer per channel") {
  ChannelParams p;
  p.per_channel_shadowing = true;
  Rng rng(4);
  const GainTable g = build_gain_table(single_pair({10, 0}, {60, 0}), p, rng, 4);
  CHECK_FALSE(g.flat());
  CHECK(g.d2d.size() == 4);
  CHECK(g.d2d_db(0)(0, 0) != g.d2d_db(1)(0, 0));
}

TEST_CASE("separate eNB constants") {
  ChannelParams p = no_shadow();
  p.enb_l1_db = 20.0;
  p.enb_l2_db = 30.0;
  Rng rng(1);
  const GainTable g = build_gain_table(single_pair({100.0, 0.0}, {150.0, 0.0}), p, rng);
  CHECK(g.enb_db(0)(0, 0) == doctest::Approx(-80.0));
}

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
  CHECK(dbw_to_watt(-130.0) == doctest::Approx(1e-13).epsilon(1e-12));
  CHECK(dbw_to_dbm(-130.0) == -100.0);
  CHECK(dbm_to_dbw(-100.0) == -130.0);
  CHECK(watt_to_dbm(0.25) == doctest::Approx(10.0 * std::log10(250.0)));
  CHECK(watt_to_dbm(0.25) == doctest::Approx(23.979).epsilon(1e-4));
}

TEST_CASE("dBm and watt conversions are inverse") {
  for (double e = -18.0; e <= 3.0; e += 0.173) {
    const double w = std::pow(10.0, e);
    CHECK(std::abs(dbm_to_watt(watt_to_dbm(w)) - w) / w < 1e-12);
    CHECK(std::abs(dbw_to_watt(watt_to_dbw(w)) - w) / w < 1e-12);
  }
}
