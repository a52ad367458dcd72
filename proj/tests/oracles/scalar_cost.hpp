#pragma once

// Test-only scalar re-implementation of the throughput / penalty cost:
// plain loops over std::pow, no code shared with the library objective.

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

struct Instance {
  int pairs = 0;
  int cells = 0;
  int channels = 0;
  std::vector<std::vector<double>> d2d_gain_db;  // [tx][rx]
  std::vector<std::vector<double>> enb_gain_db;  // [tx][cell]
  std::vector<std::vector<double>> power_dbm;    // [pair][channel]
  double noise_dbw = -130.0;
  double p_max_w = 0.25;
  double q_max_dbw = -130.0;
  double c_p = 10.0;
  double c_if = 10.0;
};

struct Result {
  double throughput = 0.0;
  double ct_p = 0.0;
  double ct_if = 0.0;
  double total = 0.0;
};

inline double watts_from_dbm(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double ratio_from_db(double db) { return std::pow(10.0, db / 10.0); }
// log2(1 + x), accurate for tiny x.
inline double log2_1p(double x) { return std::log1p(x) / std::log(2.0); }

inline Result evaluate(const Instance& in) {
  Result r;
  const double noise = std::pow(10.0, in.noise_dbw / 10.0);
  for (int k = 0; k < in.pairs; ++k) {
    for (int n = 0; n < in.channels; ++n) {
      const double s = watts_from_dbm(in.power_dbm[k][n]) * ratio_from_db(in.d2d_gain_db[k][k]);
      double i_sum = 0.0;
      for (int i = 0; i < in.pairs; ++i) {
        if (i == k) continue;
        i_sum += watts_from_dbm(in.power_dbm[i][n]) * ratio_from_db(in.d2d_gain_db[i][k]);
      }
      r.throughput += log2_1p(s / (i_sum + noise));
    }
  }
  for (int k = 0; k < in.pairs; ++k) {
    double total = 0.0;
    for (int n = 0; n < in.channels; ++n) total += watts_from_dbm(in.power_dbm[k][n]);
    r.ct_p += log2_1p(std::max(0.0, total - in.p_max_w) / in.p_max_w);
  }
  const double q = std::pow(10.0, in.q_max_dbw / 10.0);
  for (int c = 0; c < in.cells; ++c) {
    for (int n = 0; n < in.channels; ++n) {
      double e = 0.0;
      for (int k = 0; k < in.pairs; ++k) {
        e += watts_from_dbm(in.power_dbm[k][n]) * ratio_from_db(in.enb_gain_db[k][c]);
      }
      r.ct_if += log2_1p(std::max(0.0, e - q) / q);
    }
  }
  r.total = -r.throughput + in.c_if * r.ct_if + in.c_p * r.ct_p;
  return r;
}

}  // namespace oracle
