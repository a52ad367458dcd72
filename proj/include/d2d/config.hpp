#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "d2d/evaluation.hpp"
#include "d2d/training.hpp"

namespace d2d {

struct EvalParams {
  long n_drops = 1000;
  double grid_step_m = 10.0;
  double rx_offset_m = 50.0;
};

struct GradcheckParams {
  double step = 1e-5;
  double tolerance = 1e-4;
};

struct OracleParams {
  int levels = 35;
  double level_min_dbm = -150.0;
  double level_max_dbm = 20.0;
  long direct_iterations = 500;
  double direct_lr = 1.0;
};

// Everything one CLI invocation needs. Defaults are the full-scale setup:
// 1500 x 7 network, batch 50, 100k iterations, lr 1e-4, R = 500 m,
// D_max = 100 m, 8 pairs per cell, 8 channels, P_max = 0.25 W,
// noise -130 dBW.
struct ExperimentConfig {
  TrainConfig train;
  EvalParams eval;
  GradcheckParams gradcheck;
  OracleParams oracle;
  std::string out_dir = "out";

  void validate() const;
  EvalScenario scenario() const { return {train.topology, train.channel, train.constraints}; }
};

// Parses a JSON document. Missing keys take defaults; unknown keys and
// wrongly typed values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Full effective configuration, every key present.
std::string config_to_json(const ExperimentConfig& cfg);

// D2D_SEED, when set, replaces the configured seed.
inline constexpr const char* kSeedEnvVar = "D2D_SEED";
void apply_env_overrides(ExperimentConfig& cfg);

// Stream ids carved out of the root seed for non-training consumers.
inline constexpr std::uint64_t kEvalStream = 100;
inline constexpr std::uint64_t kPowerMapStream = 101;
inline constexpr std::uint64_t kGradcheckStream = 102;
inline constexpr std::uint64_t kOracleStream = 103;

}  // namespace d2d
