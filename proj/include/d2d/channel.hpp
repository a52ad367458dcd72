#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "d2d/random.hpp"
#include "d2d/topology.hpp"

namespace d2d {

// Log-distance path loss PL(d) = l1 + l2 * log10(max(d, d0)) with optional
// log-normal shadowing. l2 = 10 * alpha, so the default 40 dB/decade is a
// path-loss exponent of 4.
struct ChannelParams {
  double l1_db = 30.0;
  double l2_db = 40.0;
  double d0_m = 1.0;
  double shadow_sigma_db = 8.0;
  bool shadowing = true;
  // Draw independent shadowing per OFDMA channel instead of one flat value.
  bool per_channel_shadowing = false;
  double noise_dbw = -130.0;
  // Constants for tx -> eNB links; fall back to the D2D constants.
  std::optional<double> enb_l1_db;
  std::optional<double> enb_l2_db;

  void validate() const;
  double enb_l1() const { return enb_l1_db.value_or(l1_db); }
  double enb_l2() const { return enb_l2_db.value_or(l2_db); }
};

double path_loss_db(double distance_m, double l1_db, double l2_db, double d0_m);
double path_loss_db(double distance_m, const ChannelParams& params);

// dB link gains of one drop. d2d[n](i, j) is the gain from the transmitter
// of pair i to the receiver of pair j; enb[n](i, c) from transmitter i to
// eNB c. With a flat spectrum a single matrix serves every channel.
struct GainTable {
  std::vector<Eigen::MatrixXd> d2d;
  std::vector<Eigen::MatrixXd> enb;

  Eigen::Index pair_count() const { return d2d.front().rows(); }
  Eigen::Index cell_count() const { return enb.front().cols(); }
  bool flat() const { return d2d.size() == 1; }

  const Eigen::MatrixXd& d2d_db(Eigen::Index channel) const {
    return d2d[flat() ? 0 : static_cast<std::size_t>(channel)];
  }
  const Eigen::MatrixXd& enb_db(Eigen::Index channel) const {
    return enb[flat() ? 0 : static_cast<std::size_t>(channel)];
  }
};

// `channels` only matters with per_channel_shadowing; otherwise the table is flat.
GainTable build_gain_table(const Drop& drop, const ChannelParams& params, Rng& rng,
                           int channels = 1);

}  // namespace d2d
