#include "d2d/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

using nlohmann::json;

// Reads typed values off one JSON object and remembers which keys were
// consumed so leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& parent, const std::string& name, std::string path)
      : path_(std::move(path)) {
    if (name.empty()) {
      node_ = &parent;
    } else if (parent.contains(name)) {
      node_ = &parent.at(name);
    }
    if (node_ && !node_->is_object()) throw ConfigError(path_ + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where(key) + " must be a boolean");
      } else if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void read_optional(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    const json& v = node_->at(key);
    if (v.is_null()) {
      out.reset();
    } else if (v.is_number()) {
      out = v.get<double>();
    } else {
      throw ConfigError(where(key) + " must be a number or null");
    }
  }

  void mark(const char* key) { seen_.insert(key); }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + where(key) + "'");
    }
  }

 private:
  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* node_ = nullptr;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void ExperimentConfig::validate() const {
  train.validate();
  if (eval.n_drops < 1) throw ConfigError("eval.n_drops must be >= 1");
  if (!(eval.grid_step_m > 0.0)) throw ConfigError("eval.grid_step_m must be positive");
  if (!(gradcheck.step > 0.0)) throw ConfigError("gradcheck.step must be positive");
  if (!(gradcheck.tolerance > 0.0)) throw ConfigError("gradcheck.tolerance must be positive");
  if (oracle.levels < 1) throw ConfigError("oracle.levels must be >= 1");
  if (!(oracle.level_min_dbm <= oracle.level_max_dbm)) {
    throw ConfigError("oracle.level_min_dbm must not exceed oracle.level_max_dbm");
  }
  if (oracle.direct_iterations < 0) throw ConfigError("oracle.direct_iterations must be >= 0");
  if (!(oracle.direct_lr > 0.0)) throw ConfigError("oracle.direct_lr must be positive");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("configuration root must be an object");

  ExperimentConfig cfg;
  auto& t = cfg.train;

  Section root(doc, "", "");
  root.read("seed", t.seed);
  root.read("threads", t.threads);
  root.read("out_dir", cfg.out_dir);

  Section topo(doc, "topology", "topology");
  root.mark("topology");
  topo.read("cells", t.topology.cells);
  topo.read("radius_m", t.topology.radius);
  topo.read("pairs_per_cell", t.topology.pairs_per_cell);
  topo.read("d_max_m", t.topology.d_max);
  topo.reject_unknown();

  Section ch(doc, "channel", "channel");
  root.mark("channel");
  ch.read("l1_db", t.channel.l1_db);
  ch.read("l2_db", t.channel.l2_db);
  ch.read("d0_m", t.channel.d0_m);
  ch.read("shadow_sigma_db", t.channel.shadow_sigma_db);
  ch.read("shadowing", t.channel.shadowing);
  ch.read("per_channel_shadowing", t.channel.per_channel_shadowing);
  ch.read("noise_dbw", t.channel.noise_dbw);
  ch.read_optional("enb_l1_db", t.channel.enb_l1_db);
  ch.read_optional("enb_l2_db", t.channel.enb_l2_db);
  ch.reject_unknown();

  Section net(doc, "network", "network");
  root.mark("network");
  net.read("channels", t.network.output_size);
  net.read("width", t.network.width);
  net.read("depth", t.network.depth);
  net.read("bn_epsilon", t.network.bn_epsilon);
  net.read("bn_momentum", t.bn_momentum);
  net.read("out_min_dbm", t.network.out_min_dbm);
  net.read("out_max_dbm", t.network.out_max_dbm);
  net.reject_unknown();

  Section con(doc, "constraints", "constraints");
  root.mark("constraints");
  con.read("p_max_w", t.constraints.p_max_w);
  con.read("q_max_dbw", t.constraints.q_max_dbw);
  con.read("c_p", t.constraints.c_p);
  con.read("c_if", t.constraints.c_if);
  con.reject_unknown();

  Section tr(doc, "train", "train");
  root.mark("train");
  tr.read("n_epoch", t.n_epoch);
  tr.read("batch_size", t.batch_size);
  tr.read("lr", t.adam.lr);
  tr.read("beta1", t.adam.beta1);
  tr.read("beta2", t.adam.beta2);
  tr.read("adam_epsilon", t.adam.epsilon);
  tr.read("log_every", t.log_every);
  tr.reject_unknown();

  Section ev(doc, "eval", "eval");
  root.mark("eval");
  ev.read("n_drops", cfg.eval.n_drops);
  ev.read("grid_step_m", cfg.eval.grid_step_m);
  ev.read("rx_offset_m", cfg.eval.rx_offset_m);
  ev.reject_unknown();

  Section gc(doc, "gradcheck", "gradcheck");
  root.mark("gradcheck");
  gc.read("step", cfg.gradcheck.step);
  gc.read("tolerance", cfg.gradcheck.tolerance);
  gc.reject_unknown();

  Section orc(doc, "oracle", "oracle");
  root.mark("oracle");
  orc.read("levels", cfg.oracle.levels);
  orc.read("level_min_dbm", cfg.oracle.level_min_dbm);
  orc.read("level_max_dbm", cfg.oracle.level_max_dbm);
  orc.read("direct_iterations", cfg.oracle.direct_iterations);
  orc.read("direct_lr", cfg.oracle.direct_lr);
  orc.reject_unknown();

  root.reject_unknown();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  const auto& t = cfg.train;
  auto optional_number = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  json doc = {
      {"seed", t.seed},
      {"threads", t.threads},
      {"out_dir", cfg.out_dir},
      {"topology",
       {{"cells", t.topology.cells},
        {"radius_m", t.topology.radius},
        {"pairs_per_cell", t.topology.pairs_per_cell},
        {"d_max_m", t.topology.d_max}}},
      {"channel",
       {{"l1_db", t.channel.l1_db},
        {"l2_db", t.channel.l2_db},
        {"d0_m", t.channel.d0_m},
        {"shadow_sigma_db", t.channel.shadow_sigma_db},
        {"shadowing", t.channel.shadowing},
        {"per_channel_shadowing", t.channel.per_channel_shadowing},
        {"noise_dbw", t.channel.noise_dbw},
        {"enb_l1_db", optional_number(t.channel.enb_l1_db)},
        {"enb_l2_db", optional_number(t.channel.enb_l2_db)}}},
      {"network",
       {{"channels", t.network.output_size},
        {"width", t.network.width},
        {"depth", t.network.depth},
        {"bn_epsilon", t.network.bn_epsilon},
        {"bn_momentum", t.bn_momentum},
        {"out_min_dbm", t.network.out_min_dbm},
        {"out_max_dbm", t.network.out_max_dbm}}},
      {"constraints",
       {{"p_max_w", t.constraints.p_max_w},
        {"q_max_dbw", t.constraints.q_max_dbw},
        {"c_p", t.constraints.c_p},
        {"c_if", t.constraints.c_if}}},
      {"train",
       {{"n_epoch", t.n_epoch},
        {"batch_size", t.batch_size},
        {"lr", t.adam.lr},
        {"beta1", t.adam.beta1},
        {"beta2", t.adam.beta2},
        {"adam_epsilon", t.adam.epsilon},
        {"log_every", t.log_every}}},
      {"eval",
       {{"n_drops", cfg.eval.n_drops},
        {"grid_step_m", cfg.eval.grid_step_m},
        {"rx_offset_m", cfg.eval.rx_offset_m}}},
      {"gradcheck", {{"step", cfg.gradcheck.step}, {"tolerance", cfg.gradcheck.tolerance}}},
      {"oracle",
       {{"levels", cfg.oracle.levels},
        {"level_min_dbm", cfg.oracle.level_min_dbm},
        {"level_max_dbm", cfg.oracle.level_max_dbm},
        {"direct_iterations", cfg.oracle.direct_iterations},
        {"direct_lr", cfg.oracle.direct_lr}}},
  };
  return doc.dump(2) + "\n";
}

void apply_env_overrides(ExperimentConfig& cfg) {
  const char* raw = std::getenv(kSeedEnvVar);
  if (!raw || !*raw) return;
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(raw, &end, 10);
  if (*end != '\0') {
    throw ConfigError(std::string(kSeedEnvVar) + " must be a non-negative integer, got '" + raw +
                      "'");
  }
  cfg.train.seed = seed;
}

}  // namespace d2d
