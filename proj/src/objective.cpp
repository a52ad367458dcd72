#include "d2d/objective.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/units.hpp"

namespace d2d {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kLn10 = std::numbers::ln10;

Eigen::MatrixXd to_watts(const PowerMatrix& dbm) {
  return dbm.unaryExpr([](double p) { return dbm_to_watt(p); });
}

Eigen::MatrixXd to_linear(const Eigen::MatrixXd& db) {
  return db.unaryExpr([](double g) { return db_to_linear(g); });
}

double log2_1p(double x) { return std::log1p(x) / kLn2; }

void check_shapes(const GainTable& gains, const PowerMatrix& powers) {
  if (gains.d2d.empty() || gains.enb.empty()) throw ShapeError("empty gain table");
  if (gains.pair_count() != powers.rows()) {
    throw ShapeError("power matrix has " + std::to_string(powers.rows()) + " rows but the drop has " +
                     std::to_string(gains.pair_count()) + " pairs");
  }
  if (!gains.flat() && static_cast<Eigen::Index>(gains.d2d.size()) != powers.cols()) {
    throw ShapeError("per-channel gain table does not match the channel count");
  }
}

}  // namespace

void ConstraintConfig::validate() const {
  if (!(p_max_w > 0.0)) throw ConfigError("constraints.p_max_w must be positive");
  if (!std::isfinite(q_max_dbw)) throw ConfigError("constraints.q_max_dbw must be finite");
  if (!(c_p >= 0.0)) throw ConfigError("constraints.c_p must be >= 0");
  if (!(c_if >= 0.0)) throw ConfigError("constraints.c_if must be >= 0");
}

double ConstraintConfig::q_max_w() const { return dbw_to_watt(q_max_dbw); }

Eigen::VectorXd throughput(const GainTable& gains, const PowerMatrix& powers_dbm,
                           double noise_dbw) {
  check_shapes(gains, powers_dbm);
  const Eigen::Index k = powers_dbm.rows();
  const Eigen::Index n_ch = powers_dbm.cols();
  const double noise = dbw_to_watt(noise_dbw);
  const Eigen::MatrixXd w = to_watts(powers_dbm);

  Eigen::VectorXd t = Eigen::VectorXd::Zero(k);
  for (Eigen::Index n = 0; n < n_ch; ++n) {
    const Eigen::MatrixXd g = to_linear(gains.d2d_db(n));
    for (Eigen::Index rx = 0; rx < k; ++rx) {
      double interference = 0.0;
      for (Eigen::Index tx = 0; tx < k; ++tx) {
        if (tx != rx) interference += w(tx, n) * g(tx, rx);
      }
      const double signal = w(rx, n) * g(rx, rx);
      t(rx) += log2_1p(signal / (interference + noise));
    }
  }
  return t;
}

double power_penalty(const PowerMatrix& powers_dbm, double p_max_w) {
  const Eigen::VectorXd totals = to_watts(powers_dbm).rowwise().sum();
  double ct = 0.0;
  for (Eigen::Index k = 0; k < totals.size(); ++k) {
    ct += log2_1p(std::max(0.0, totals(k) - p_max_w) / p_max_w);
  }
  return ct;
}

Eigen::MatrixXd enb_interference(const GainTable& gains, const PowerMatrix& powers_dbm) {
  check_shapes(gains, powers_dbm);
  const Eigen::MatrixXd w = to_watts(powers_dbm);
  const Eigen::Index cells = gains.cell_count();
  Eigen::MatrixXd out(cells, w.cols());
  for (Eigen::Index n = 0; n < w.cols(); ++n) {
    const Eigen::MatrixXd b = to_linear(gains.enb_db(n));  // K x C
    out.col(n) = b.transpose() * w.col(n);
  }
  return out;
}

double interference_penalty(const Eigen::MatrixXd& enb_if_w, double q_max_w) {
  if (!(q_max_w > 0.0)) throw ConfigError("Q_max must be positive");
  double ct = 0.0;
  for (Eigen::Index c = 0; c < enb_if_w.rows(); ++c) {
    for (Eigen::Index n = 0; n < enb_if_w.cols(); ++n) {
      ct += log2_1p(std::max(0.0, enb_if_w(c, n) - q_max_w) / q_max_w);
    }
  }
  return ct;
}

CostBreakdown drop_cost(const GainTable& gains, const PowerMatrix& powers_dbm,
                        const ConstraintConfig& cfg, double noise_dbw) {
  CostBreakdown b;
  b.sum_throughput = throughput(gains, powers_dbm, noise_dbw).sum();
  b.ct_p = power_penalty(powers_dbm, cfg.p_max_w);
  b.ct_if = interference_penalty(enb_interference(gains, powers_dbm), cfg.q_max_w());
  b.total = -b.sum_throughput + cfg.c_if * b.ct_if + cfg.c_p * b.ct_p;
  return b;
}

CostGradient drop_cost_gradient(const GainTable& gains, const PowerMatrix& powers_dbm,
                                const ConstraintConfig& cfg, double noise_dbw) {
  check_shapes(gains, powers_dbm);
  const Eigen::Index k = powers_dbm.rows();
  const Eigen::Index n_ch = powers_dbm.cols();
  const double noise = dbw_to_watt(noise_dbw);
  const double q_max = cfg.q_max_w();
  const Eigen::MatrixXd w = to_watts(powers_dbm);

  CostGradient out;
  Eigen::MatrixXd d_w = Eigen::MatrixXd::Zero(k, n_ch);  // d(total)/d(watts)

  Eigen::VectorXd disturbance(k);
  Eigen::VectorXd signal(k);
  for (Eigen::Index n = 0; n < n_ch; ++n) {
    const Eigen::MatrixXd g = to_linear(gains.d2d_db(n));
    for (Eigen::Index rx = 0; rx < k; ++rx) {
      double interference = 0.0;
      for (Eigen::Index tx = 0; tx < k; ++tx) {
        if (tx != rx) interference += w(tx, n) * g(tx, rx);
      }
      disturbance(rx) = interference + noise;
      signal(rx) = w(rx, n) * g(rx, rx);
      out.cost.sum_throughput += log2_1p(signal(rx) / disturbance(rx));
    }
    for (Eigen::Index rx = 0; rx < k; ++rx) {
      const double dv = disturbance(rx);
      const double sv = signal(rx);
      // Own power raises the numerator; every other transmitter raises the
      // interference seen at this receiver.
      d_w(rx, n) -= g(rx, rx) / ((dv + sv) * kLn2);
      const double cross = sv / (dv * (dv + sv) * kLn2);
      for (Eigen::Index tx = 0; tx < k; ++tx) {
        if (tx != rx) d_w(tx, n) += cross * g(tx, rx);
      }
    }
  }

  const Eigen::VectorXd totals = w.rowwise().sum();
  for (Eigen::Index tx = 0; tx < k; ++tx) {
    const double excess = totals(tx) - cfg.p_max_w;
    out.cost.ct_p += log2_1p(std::max(0.0, excess) / cfg.p_max_w);
    if (excess > 0.0) d_w.row(tx).array() += cfg.c_p / (totals(tx) * kLn2);
  }

  for (Eigen::Index n = 0; n < n_ch; ++n) {
    const Eigen::MatrixXd b = to_linear(gains.enb_db(n));
    const Eigen::VectorXd received = b.transpose() * w.col(n);
    for (Eigen::Index c = 0; c < received.size(); ++c) {
      const double excess = received(c) - q_max;
      out.cost.ct_if += log2_1p(std::max(0.0, excess) / q_max);
      if (excess > 0.0) d_w.col(n) += (cfg.c_if / (received(c) * kLn2)) * b.col(c);
    }
  }

  out.cost.total = -out.cost.sum_throughput + cfg.c_if * out.cost.ct_if + cfg.c_p * out.cost.ct_p;
  out.d_power_dbm = (d_w.array() * w.array() * (kLn10 / 10.0)).matrix();
  return out;
}

double batch_cost(const std::vector<GainTable>& gains, const std::vector<PowerMatrix>& powers_dbm,
                  const ConstraintConfig& cfg, double noise_dbw) {
  if (gains.size() != powers_dbm.size()) {
    throw ShapeError("batch_cost: " + std::to_string(gains.size()) + " gain tables but " +
                     std::to_string(powers_dbm.size()) + " power matrices");
  }
  if (gains.empty()) throw ShapeError("batch_cost: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    sum += drop_cost(gains[i], powers_dbm[i], cfg, noise_dbw).total;
  }
  return sum / static_cast<double>(gains.size());
}

double spectral_efficiency(const Eigen::VectorXd& per_pair_throughput, Eigen::Index pairs,
                           Eigen::Index channels) {
  if (pairs < 1 || channels < 1) throw ShapeError("spectral efficiency needs K, N >= 1");
  return per_pair_throughput.sum() / static_cast<double>(pairs * channels);
}

Eigen::Index count_pmax_violations(const PowerMatrix& powers_dbm, double p_max_w) {
  const Eigen::VectorXd totals = to_watts(powers_dbm).rowwise().sum();
  return (totals.array() > p_max_w).count();
}

Eigen::Index count_q_exceedances(const Eigen::MatrixXd& enb_if_w, double q_max_w) {
  return (enb_if_w.array() > q_max_w).count();
}

}  // namespace d2d
