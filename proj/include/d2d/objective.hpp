#pragma once

#include <vector>

#include <Eigen/Dense>

#include "d2d/channel.hpp"

namespace d2d {

// K x N per-channel transmit powers in dBm.
using PowerMatrix = Eigen::MatrixXd;

struct ConstraintConfig {
  double p_max_w = 0.25;     // per-transmitter total power cap
  double q_max_dbw = -130.0; // per-channel cap on aggregate interference at each eNB
  double c_p = 10.0;
  double c_if = 10.0;

  void validate() const;
  double q_max_w() const;
};

struct CostBreakdown {
  double sum_throughput = 0.0;  // bits/s/Hz summed over pairs and channels
  double ct_p = 0.0;
  double ct_if = 0.0;
  double total = 0.0;  // -sum_throughput + c_if * ct_if + c_p * ct_p
};

// Shannon throughput per pair: T_k = sum_n log2(1 + S / (I + noise)).
Eigen::VectorXd throughput(const GainTable& gains, const PowerMatrix& powers_dbm,
                           double noise_dbw);

// sum_k log2(1 + ReLU(sum_n p_kn - P_max) / P_max), powers in watts.
double power_penalty(const PowerMatrix& powers_dbm, double p_max_w);

// C x N aggregate interference at each eNB in watts (noise excluded).
Eigen::MatrixXd enb_interference(const GainTable& gains, const PowerMatrix& powers_dbm);

// sum_c sum_n log2(1 + ReLU(if_cn - Q_max) / Q_max).
double interference_penalty(const Eigen::MatrixXd& enb_if_w, double q_max_w);

CostBreakdown drop_cost(const GainTable& gains, const PowerMatrix& powers_dbm,
                        const ConstraintConfig& cfg, double noise_dbw);

struct CostGradient {
  CostBreakdown cost;
  PowerMatrix d_power_dbm;  // d(total) / d(p_kn in dBm)
};

// Analytic derivative of drop_cost().total with respect to every power.
// ReLU kinks take the zero subgradient.
CostGradient drop_cost_gradient(const GainTable& gains, const PowerMatrix& powers_dbm,
                                const ConstraintConfig& cfg, double noise_dbw);

// Mean of drop_cost().total over aligned lists.
double batch_cost(const std::vector<GainTable>& gains, const std::vector<PowerMatrix>& powers_dbm,
                  const ConstraintConfig& cfg, double noise_dbw);

// eta = sum_k T_k / (K * N).
double spectral_efficiency(const Eigen::VectorXd& per_pair_throughput, Eigen::Index pairs,
                           Eigen::Index channels);

// Transmitters whose total power exceeds p_max_w.
Eigen::Index count_pmax_violations(const PowerMatrix& powers_dbm, double p_max_w);
// (c, n) entries above q_max_w.
Eigen::Index count_q_exceedances(const Eigen::MatrixXd& enb_if_w, double q_max_w);

}  // namespace d2d
