#include "d2d/channel.hpp"

#include <algorithm>
#include <cmath>

#include "d2d/errors.hpp"

namespace d2d {

void ChannelParams::validate() const {
  if (!(l2_db > 0.0)) throw ConfigError("channel.l2_db must be positive");
  if (!(d0_m > 0.0)) throw ConfigError("channel.d0_m must be positive");
  if (!(shadow_sigma_db >= 0.0)) throw ConfigError("channel.shadow_sigma_db must be >= 0");
  if (enb_l2_db && !(*enb_l2_db > 0.0)) throw ConfigError("channel.enb_l2_db must be positive");
  if (!std::isfinite(noise_dbw)) throw ConfigError("channel.noise_dbw must be finite");
}

double path_loss_db(double distance_m, double l1_db, double l2_db, double d0_m) {
  return l1_db + l2_db * std::log10(std::max(distance_m, d0_m));
}

double path_loss_db(double distance_m, const ChannelParams& params) {
  return path_loss_db(distance_m, params.l1_db, params.l2_db, params.d0_m);
}

GainTable build_gain_table(const Drop& drop, const ChannelParams& params, Rng& rng,
                           int channels) {
  const auto k = static_cast<Eigen::Index>(drop.pair_count());
  const auto c = static_cast<Eigen::Index>(drop.layout.centers.size());
  const int layers = params.per_channel_shadowing ? std::max(channels, 1) : 1;
  const bool shadow = params.shadowing && params.shadow_sigma_db > 0.0;

  GainTable table;
  table.d2d.reserve(static_cast<std::size_t>(layers));
  table.enb.reserve(static_cast<std::size_t>(layers));
  for (int n = 0; n < layers; ++n) {
    Eigen::MatrixXd d2d(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        const double d = distance(drop.pairs[i].tx, drop.pairs[j].rx);
        d2d(i, j) = -path_loss_db(d, params);
        if (shadow) d2d(i, j) += rng.normal(0.0, params.shadow_sigma_db);
      }
    }
    Eigen::MatrixXd enb(k, c);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index cell = 0; cell < c; ++cell) {
        const double d = distance(drop.pairs[i].tx, drop.layout.centers[cell]);
        enb(i, cell) = -path_loss_db(d, params.enb_l1(), params.enb_l2(), params.d0_m);
        if (shadow) enb(i, cell) += rng.normal(0.0, params.shadow_sigma_db);
      }
    }
    table.d2d.push_back(std::move(d2d));
    table.enb.push_back(std::move(enb));
  }
  return table;
}

}  // namespace d2d
