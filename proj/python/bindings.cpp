#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "d2d/checkpoint.hpp"
#include "d2d/config.hpp"
#include "d2d/errors.hpp"
#include "d2d/evaluation.hpp"
#include "d2d/training.hpp"

namespace py = pybind11;
using namespace d2d;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Learned distributed D2D power allocation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  auto format = py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<VersionError>(m, "VersionError", format.ptr());
  py::register_exception<TruncatedError>(m, "TruncatedError", format.ptr());
  py::register_exception<SearchSpaceError>(m, "SearchSpaceError", base.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", py::overload_cast<>(&Rng::normal))
      .def("split", &Rng::split, py::arg("stream"))
      .def_property_readonly("seed", &Rng::seed);

  // topology
  py::class_<Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0)
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y)
      .def("__repr__", [](const Point& p) {
        return "Point(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
      });
  py::class_<CellLayout>(m, "CellLayout")
      .def_readonly("centers", &CellLayout::centers)
      .def_readonly("radius", &CellLayout::radius)
      .def_property_readonly("cell_count", &CellLayout::cell_count);
  py::class_<D2DPair>(m, "D2DPair")
      .def_readonly("tx", &D2DPair::tx)
      .def_readonly("rx", &D2DPair::rx)
      .def_readonly("home_cell", &D2DPair::home_cell);
  py::class_<Drop>(m, "Drop")
      .def_readonly("layout", &Drop::layout)
      .def_readonly("pairs", &Drop::pairs)
      .def_property_readonly("pair_count", &Drop::pair_count);
  py::class_<Batch>(m, "Batch")
      .def_readonly("drops", &Batch::drops)
      .def("__len__", &Batch::size);
  py::class_<TopologyParams>(m, "TopologyParams")
      .def(py::init<>())
      .def_readwrite("cells", &TopologyParams::cells)
      .def_readwrite("radius", &TopologyParams::radius)
      .def_readwrite("pairs_per_cell", &TopologyParams::pairs_per_cell)
      .def_readwrite("d_max", &TopologyParams::d_max);

  m.def("build_hex_layout", &build_hex_layout, py::arg("cells"), py::arg("radius"));
  m.def("in_hexagon", &in_hexagon, py::arg("p"), py::arg("center"), py::arg("radius"));
  m.def("distance_to_nearest_center", &distance_to_nearest_center);
  m.def("sample_drop", &sample_drop, py::arg("layout"), py::arg("pairs_per_cell"),
        py::arg("d_max"), py::arg("rng"));
  m.def("sample_batch", &sample_batch, py::arg("layout"), py::arg("pairs_per_cell"),
        py::arg("d_max"), py::arg("drops"), py::arg("rng"));
  m.def("pair_coordinates", &pair_coordinates);
  m.def("flatten_batch", &flatten_batch);

  // channel
  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("l1_db", &ChannelParams::l1_db)
      .def_readwrite("l2_db", &ChannelParams::l2_db)
      .def_readwrite("d0_m", &ChannelParams::d0_m)
      .def_readwrite("shadow_sigma_db", &ChannelParams::shadow_sigma_db)
      .def_readwrite("shadowing", &ChannelParams::shadowing)
      .def_readwrite("per_channel_shadowing", &ChannelParams::per_channel_shadowing)
      .def_readwrite("noise_dbw", &ChannelParams::noise_dbw);
  py::class_<GainTable>(m, "GainTable")
      .def_readonly("d2d", &GainTable::d2d)
      .def_readonly("enb", &GainTable::enb);
  m.def("path_loss_db", py::overload_cast<double, const ChannelParams&>(&path_loss_db),
        py::arg("distance_m"), py::arg("params") = ChannelParams{});
  m.def("build_gain_table", &build_gain_table, py::arg("drop"), py::arg("params"),
        py::arg("rng"), py::arg("channels") = 1);

  // network
  py::class_<NetworkConfig>(m, "NetworkConfig")
      .def(py::init<>())
      .def_readwrite("input_size", &NetworkConfig::input_size)
      .def_readwrite("output_size", &NetworkConfig::output_size)
      .def_readwrite("width", &NetworkConfig::width)
      .def_readwrite("depth", &NetworkConfig::depth)
      .def_readwrite("bn_epsilon", &NetworkConfig::bn_epsilon)
      .def_readwrite("out_min_dbm", &NetworkConfig::out_min_dbm)
      .def_readwrite("out_max_dbm", &NetworkConfig::out_max_dbm);
  py::class_<LayerParams>(m, "LayerParams")
      .def_readwrite("weights", &LayerParams::weights)
      .def_readwrite("scale", &LayerParams::scale)
      .def_readwrite("shift", &LayerParams::shift);
  py::class_<NetworkParams>(m, "NetworkParams")
      .def_readonly("config", &NetworkParams::config)
      .def_readwrite("layers", &NetworkParams::layers)
      .def_property_readonly("parameter_count", &NetworkParams::parameter_count);
  py::class_<BatchNormStats>(m, "BatchNormStats")
      .def_readwrite("mean", &BatchNormStats::mean)
      .def_readwrite("var", &BatchNormStats::var)
      .def_readwrite("momentum", &BatchNormStats::momentum);
  m.def("xavier_range", &xavier_range);
  m.def("init_network", &init_network, py::arg("config"), py::arg("rng"));
  m.def("init_stats", &init_stats, py::arg("config"), py::arg("momentum") = 0.99);
  m.def(
      "forward_train",
      [](const NetworkParams& p, const Eigen::MatrixXd& x) {
        return forward(p, x, Mode::train, BatchNormStats{}).powers_dbm;
      },
      py::arg("params"), py::arg("inputs"), "Train-mode forward pass over the rows of inputs.");
  m.def("predict", &predict, py::arg("params"), py::arg("stats"), py::arg("inputs"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("stats"), py::arg("path"));
  m.def(
      "load_checkpoint",
      [](const std::filesystem::path& path) {
        Checkpoint ck = load_checkpoint(path);
        return py::make_tuple(ck.params, ck.stats);
      },
      py::arg("path"));

  // objective
  py::class_<ConstraintConfig>(m, "ConstraintConfig")
      .def(py::init<>())
      .def_readwrite("p_max_w", &ConstraintConfig::p_max_w)
      .def_readwrite("q_max_dbw", &ConstraintConfig::q_max_dbw)
      .def_readwrite("c_p", &ConstraintConfig::c_p)
      .def_readwrite("c_if", &ConstraintConfig::c_if);
  py::class_<CostBreakdown>(m, "CostBreakdown")
      .def_readonly("sum_throughput", &CostBreakdown::sum_throughput)
      .def_readonly("ct_p", &CostBreakdown::ct_p)
      .def_readonly("ct_if", &CostBreakdown::ct_if)
      .def_readonly("total", &CostBreakdown::total);
  m.def("throughput", &throughput, py::arg("gains"), py::arg("powers_dbm"),
        py::arg("noise_dbw") = -130.0);
  m.def("enb_interference", &enb_interference, py::arg("gains"), py::arg("powers_dbm"));
  m.def("drop_cost", &drop_cost, py::arg("gains"), py::arg("powers_dbm"),
        py::arg("constraints") = ConstraintConfig{}, py::arg("noise_dbw") = -130.0);
  m.def("batch_cost", &batch_cost, py::arg("gains"), py::arg("powers_dbm"),
        py::arg("constraints") = ConstraintConfig{}, py::arg("noise_dbw") = -130.0);

  // training and evaluation, driven by a JSON configuration
  py::class_<MetricsRecord>(m, "MetricsRecord")
      .def_readonly("iteration", &MetricsRecord::iteration)
      .def_readonly("cost_total", &MetricsRecord::cost_total)
      .def_readonly("mean_eta", &MetricsRecord::mean_eta)
      .def_readonly("ct_p", &MetricsRecord::ct_p)
      .def_readonly("ct_if", &MetricsRecord::ct_if)
      .def_readonly("pmax_violation_rate", &MetricsRecord::pmax_violation_rate)
      .def_readonly("q_exceed_rate", &MetricsRecord::q_exceed_rate);
  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("stats", &TrainResult::stats)
      .def_readonly("metrics", &TrainResult::metrics);
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("mean_eta", &EvalReport::mean_eta)
      .def_readonly("eta_std", &EvalReport::eta_std)
      .def_readonly("mean_total_power_per_tx", &EvalReport::mean_total_power_per_tx)
      .def_readonly("pmax_violation_rate", &EvalReport::pmax_violation_rate)
      .def_readonly("q_exceed_rate", &EvalReport::q_exceed_rate)
      .def_readonly("n_drops", &EvalReport::n_drops);

  m.def("resolve_config", [](const std::string& text) { return config_to_json(parse_config(text)); },
        py::arg("json_text"), "Effective configuration with every default filled in.");
  m.def(
      "train",
      [](const std::string& text) {
        ExperimentConfig cfg = parse_config(text);
        cfg.validate();
        py::gil_scoped_release release;
        return train(cfg.train);
      },
      py::arg("json_text"));
  m.def(
      "evaluate",
      [](const NetworkParams& params, const BatchNormStats& stats, const std::string& text,
         std::optional<long> n_drops) {
        ExperimentConfig cfg = parse_config(text);
        cfg.validate();
        Rng rng = Rng(cfg.train.seed).split(kEvalStream);
        py::gil_scoped_release release;
        return evaluate(params, stats, cfg.scenario(), n_drops.value_or(cfg.eval.n_drops), rng,
                        cfg.train.threads);
      },
      py::arg("params"), py::arg("stats"), py::arg("json_text"), py::arg("n_drops") = py::none());
  m.def(
      "power_map",
      [](const NetworkParams& params, const BatchNormStats& stats, const CellLayout& layout,
         double grid_step, double rx_offset) {
        const PowerMapRaster r = power_map(params, stats, layout, grid_step, rx_offset);
        Eigen::MatrixXd out(static_cast<Eigen::Index>(r.points.size()), 3);
        for (std::size_t i = 0; i < r.points.size(); ++i) {
          out.row(static_cast<Eigen::Index>(i)) << r.points[i].x, r.points[i].y,
              r.points[i].mean_dbm;
        }
        return out;
      },
      py::arg("params"), py::arg("stats"), py::arg("layout"), py::arg("grid_step") = 10.0,
      py::arg("rx_offset") = 50.0, "Rows of (x, y, mean_dbm).");

  // oracles
  m.def("linear_levels", &linear_levels, py::arg("count"), py::arg("lo"), py::arg("hi"));
  m.def(
      "oracle_grid_search",
      [](const GainTable& g, const ConstraintConfig& c, double noise, Eigen::Index channels,
         std::vector<double> levels) {
        GridSearchResult r = oracle_grid_search(g, c, noise, channels, std::move(levels));
        return py::make_tuple(r.best, r.cost, r.evaluations);
      },
      py::arg("gains"), py::arg("constraints"), py::arg("noise_dbw"), py::arg("channels"),
      py::arg("levels"));
  m.def(
      "oracle_direct_opt",
      [](const GainTable& g, const ConstraintConfig& c, double noise, Eigen::Index channels,
         long iterations, double lr) {
        DirectOptConfig o;
        o.iterations = iterations;
        o.lr = lr;
        DirectOptResult r = oracle_direct_opt(g, c, noise, channels, o);
        return py::make_tuple(r.powers, r.cost);
      },
      py::arg("gains"), py::arg("constraints"), py::arg("noise_dbw"), py::arg("channels"),
      py::arg("iterations") = 500, py::arg("lr") = 1.0);
}
