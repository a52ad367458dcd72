#include "d2d/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "d2d/checkpoint.hpp"
#include "d2d/config.hpp"
#include "d2d/csv.hpp"
#include "d2d/errors.hpp"
#include "d2d/evaluation.hpp"
#include "d2d/training.hpp"

namespace d2d::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

ExperimentConfig resolve_config(const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config_path);
  apply_env_overrides(cfg);
  if (opt.seed) cfg.train.seed = *opt.seed;
  if (opt.threads) cfg.train.threads = *opt.threads;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  std::ofstream echo(fs::path(cfg.out_dir) / "config.json", std::ios::trunc);
  if (!echo) throw IoError("cannot write effective config into " + cfg.out_dir);
  echo << config_to_json(cfg);
  return cfg;
}

fs::path checkpoint_path(const Options& opt, const ExperimentConfig& cfg) {
  return opt.checkpoint_path.empty() ? fs::path(cfg.out_dir) / "checkpoint.bin"
                                     : fs::path(opt.checkpoint_path);
}

Checkpoint load_for(const Options& opt, const ExperimentConfig& cfg) {
  const fs::path path = checkpoint_path(opt, cfg);
  if (!fs::exists(path)) throw IoError("checkpoint not found: " + path.string());
  return load_checkpoint(path, cfg.train.network);
}

int cmd_train(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const fs::path out(cfg.out_dir);
  CsvWriter metrics = open_metrics_csv(out / "metrics.csv");
  CsvWriter timing = open_timing_csv(out / "timing.csv");
  const long report_every = std::max<long>(1, cfg.train.n_epoch / 20);
  const TrainResult result = train(cfg.train, {}, [&](const MetricsRecord& r) {
    write_metrics_row(metrics, r);
    write_timing_row(timing, r);
    if (r.iteration % report_every == 0 || r.iteration == cfg.train.n_epoch) {
      std::cout << "iter " << r.iteration << "  cost " << format_double(r.cost_total) << "  eta "
                << format_double(r.mean_eta) << "  q_exceed " << format_double(r.q_exceed_rate)
                << '\n';
    }
  });
  save_checkpoint(result.params, result.stats, out / "checkpoint.bin");
  std::cout << "wrote " << (out / "metrics.csv").string() << " and "
            << (out / "checkpoint.bin").string() << '\n';
  return kOk;
}

int cmd_eval(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const Checkpoint ck = load_for(opt, cfg);
  Rng rng = Rng(cfg.train.seed).split(kEvalStream);
  const EvalReport rep =
      evaluate(ck.params, ck.stats, cfg.scenario(), cfg.eval.n_drops, rng, cfg.train.threads);
  const fs::path out(cfg.out_dir);
  write_eval_report(out / "eval.txt", out / "eval.csv", rep);
  std::cout << "mean_eta = " << format_double(rep.mean_eta)
            << "\npmax_violation_rate = " << format_double(rep.pmax_violation_rate)
            << "\nq_exceed_rate = " << format_double(rep.q_exceed_rate) << '\n';
  return kOk;
}

int cmd_powermap(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const Checkpoint ck = load_for(opt, cfg);
  const auto& topo = cfg.train.topology;
  const CellLayout layout = build_hex_layout(topo.cells, topo.radius);
  const PowerMapRaster raster =
      power_map(ck.params, ck.stats, layout, cfg.eval.grid_step_m, cfg.eval.rx_offset_m);
  write_raster_csv(fs::path(cfg.out_dir) / "powermap.csv", raster);
  std::cout << "points = " << raster.points.size() << "\ncenter_mean_dbm = "
            << format_double(region_mean(raster, layout, 0.0, 0.25 * topo.radius))
            << "\nedge_mean_dbm = "
            << format_double(region_mean(raster, layout, 0.75 * topo.radius, 1e300)) << '\n';
  return kOk;
}

int cmd_gradcheck(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const auto& t = cfg.train;
  Rng rng = Rng(t.seed).split(kGradcheckStream);
  const NetworkParams params = init_network(t.network, rng);
  const CellLayout layout = build_hex_layout(t.topology.cells, t.topology.radius);
  const Batch batch =
      sample_batch(layout, t.topology.pairs_per_cell, t.topology.d_max, t.batch_size, rng);
  std::vector<GainTable> gains;
  for (const auto& d : batch.drops) {
    gains.push_back(build_gain_table(d, t.channel, rng, t.network.output_size));
  }
  const GradCheckReport rep =
      finite_difference_check(params, batch, gains, t.constraints, t.channel.noise_dbw,
                              cfg.gradcheck.step, cfg.gradcheck.tolerance);
  std::cout << "checked = " << rep.checked << "\nfailed = " << rep.failed
            << "\nmax_error = " << format_double(rep.max_error)
            << "\ntolerance = " << format_double(rep.tolerance) << '\n'
            << (rep.passed() ? "PASS" : "FAIL") << '\n';
  return rep.passed() ? kOk : kGradcheckFailed;
}

int cmd_oracle(const Options& opt) {
  const ExperimentConfig cfg = resolve_config(opt);
  const auto& t = cfg.train;
  Rng rng = Rng(t.seed).split(kOracleStream);
  const CellLayout layout = build_hex_layout(t.topology.cells, t.topology.radius);
  const Drop drop = sample_drop(layout, t.topology.pairs_per_cell, t.topology.d_max, rng);
  const Eigen::Index channels = t.network.output_size;
  const GainTable gains = build_gain_table(drop, t.channel, rng, static_cast<int>(channels));
  const double noise = t.channel.noise_dbw;

  const GridSearchResult grid = oracle_grid_search(
      gains, t.constraints, noise, channels,
      linear_levels(cfg.oracle.levels, cfg.oracle.level_min_dbm, cfg.oracle.level_max_dbm));
  DirectOptConfig dopt;
  dopt.iterations = cfg.oracle.direct_iterations;
  dopt.lr = cfg.oracle.direct_lr;
  dopt.min_dbm = t.network.out_min_dbm;
  dopt.max_dbm = t.network.out_max_dbm;
  const DirectOptResult direct = oracle_direct_opt(gains, t.constraints, noise, channels, dopt);

  struct Row {
    std::string method;
    PowerMatrix powers;
    CostBreakdown cost;
  };
  std::vector<Row> rows{{"grid_search", grid.best, grid.cost},
                        {"direct_opt", direct.powers, direct.cost}};
  const bool with_network = !opt.checkpoint_path.empty() ||
                            fs::exists(fs::path(cfg.out_dir) / "checkpoint.bin");
  if (with_network) {
    const Checkpoint ck = load_for(opt, cfg);
    const PowerMatrix p = predict(ck.params, ck.stats, pair_coordinates(drop));
    rows.push_back({"network", p, drop_cost(gains, p, t.constraints, noise)});
  }

  const fs::path out(cfg.out_dir);
  CsvWriter table(out / "oracle.csv", {"method", "cost_total", "sum_throughput", "ct_p", "ct_if"});
  CsvWriter powers(out / "oracle_powers.csv", {"method", "pair", "channel", "power_dbm"});
  for (const auto& r : rows) {
    table.field(r.method)
        .field(r.cost.total)
        .field(r.cost.sum_throughput)
        .field(r.cost.ct_p)
        .field(r.cost.ct_if)
        .end_row();
    for (Eigen::Index k = 0; k < r.powers.rows(); ++k) {
      for (Eigen::Index n = 0; n < r.powers.cols(); ++n) {
        powers.field(r.method).field(static_cast<long>(k)).field(static_cast<long>(n))
            .field(r.powers(k, n)).end_row();
      }
    }
    std::cout << r.method << ": cost " << format_double(r.cost.total) << '\n';
  }
  std::cout << "grid evaluations = " << grid.evaluations << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Distributed D2D power allocation with a penalty-trained network"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_checkpoint) {
    sub->add_option("--config", opt.config_path, "JSON experiment configuration")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out-dir", opt.out_dir, "Output directory (overrides out_dir)");
    sub->add_option("--seed", opt.seed, "Seed override (takes precedence over D2D_SEED)");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
    if (with_checkpoint) {
      sub->add_option("--checkpoint", opt.checkpoint_path,
                      "Checkpoint file (default <out-dir>/checkpoint.bin)");
    }
  };

  auto* train_cmd = app.add_subcommand("train", "Train the network, write metrics and checkpoint");
  auto* eval_cmd = app.add_subcommand("eval", "Held-out evaluation of a checkpoint");
  auto* map_cmd = app.add_subcommand("powermap", "Raster of mean allocated power over the cells");
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient gate");
  auto* oracle_cmd = app.add_subcommand("oracle", "Grid-search and direct-optimisation references");
  add_common(train_cmd, false);
  add_common(eval_cmd, true);
  add_common(map_cmd, true);
  add_common(grad_cmd, false);
  add_common(oracle_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(opt);
    if (eval_cmd->parsed()) return cmd_eval(opt);
    if (map_cmd->parsed()) return cmd_powermap(opt);
    if (grad_cmd->parsed()) return cmd_gradcheck(opt);
    if (oracle_cmd->parsed()) return cmd_oracle(opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kCheckpointError;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kCheckpointError;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const SearchSpaceError& e) {
    std::cerr << "oracle error: " << e.what() << '\n';
    return kSearchSpace;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace d2d::cli
