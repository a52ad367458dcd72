#include "d2d/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

class Writer {
 public:
  void bytes(const char* data, std::size_t n) { buf_.insert(buf_.end(), data, data + n); }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }

  template <typename Derived>
  void row_major(const Eigen::DenseBase<Derived>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
  }

  const std::vector<char>& data() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> data) : buf_(std::move(data)) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > buf_.size()) {
      throw TruncatedError(std::string("checkpoint truncated while reading ") + what);
    }
  }

  void bytes(char* out, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, const char* what) {
    need(static_cast<std::size_t>(rows * cols) * 8, what);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64(what);
    }
    return m;
  }

  Eigen::VectorXd vector(Eigen::Index n, const char* what) {
    return matrix(n, 1, what).col(0);
  }

  bool at_end() const { return pos_ == buf_.size(); }

 private:
  std::vector<char> buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const NetworkParams& params, const BatchNormStats& stats,
                     const std::filesystem::path& path) {
  const auto& cfg = params.config;
  if (stats.mean.size() != params.layers.size() || stats.var.size() != params.layers.size()) {
    throw ShapeError("running statistics do not match the network depth");
  }
  Writer w;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(cfg.depth));
  w.u32(static_cast<std::uint32_t>(cfg.width));
  w.u32(static_cast<std::uint32_t>(cfg.input_size));
  w.u32(static_cast<std::uint32_t>(cfg.output_size));
  w.f64(cfg.bn_epsilon);
  w.f64(cfg.out_min_dbm);
  w.f64(cfg.out_max_dbm);
  w.f64(stats.momentum);
  for (std::size_t j = 0; j < params.layers.size(); ++j) {
    const auto& l = params.layers[j];
    w.row_major(l.weights);
    w.row_major(l.scale);
    w.row_major(l.shift);
    w.row_major(stats.mean[j]);
    w.row_major(stats.var[j]);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<NetworkConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  char magic[sizeof kCheckpointMagic];
  r.bytes(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw FormatError("not a d2dpower checkpoint (bad magic): " + path.string());
  }
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw VersionError("unsupported checkpoint version " + std::to_string(version) +
                       " (expected " + std::to_string(kCheckpointVersion) + ")");
  }

  Checkpoint ck;
  auto& cfg = ck.params.config;
  cfg.depth = static_cast<int>(r.u32("depth"));
  cfg.width = static_cast<int>(r.u32("width"));
  cfg.input_size = static_cast<int>(r.u32("input_size"));
  cfg.output_size = static_cast<int>(r.u32("output_size"));
  cfg.bn_epsilon = r.f64("bn_epsilon");
  cfg.out_min_dbm = r.f64("out_min_dbm");
  cfg.out_max_dbm = r.f64("out_max_dbm");
  ck.stats.momentum = r.f64("bn_momentum");
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid checkpoint header: ") + e.what());
  }

  if (expected) {
    if (expected->depth != cfg.depth || expected->width != cfg.width ||
        expected->input_size != cfg.input_size || expected->output_size != cfg.output_size) {
      throw ShapeError("checkpoint shape (depth " + std::to_string(cfg.depth) + ", width " +
                       std::to_string(cfg.width) + ", outputs " +
                       std::to_string(cfg.output_size) + ") does not match configuration (depth " +
                       std::to_string(expected->depth) + ", width " +
                       std::to_string(expected->width) + ", outputs " +
                       std::to_string(expected->output_size) + ")");
    }
  }

  for (int j = 0; j < cfg.layer_count(); ++j) {
    const Eigen::Index fin = cfg.fan_in(j);
    const Eigen::Index fout = cfg.fan_out(j);
    LayerParams l;
    l.weights = r.matrix(fin, fout, "weights");
    l.scale = r.vector(fout, "scale");
    l.shift = r.vector(fout, "shift");
    ck.stats.mean.push_back(r.vector(fout, "running mean"));
    ck.stats.var.push_back(r.vector(fout, "running variance"));
    ck.params.layers.push_back(std::move(l));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after checkpoint payload");
  return ck;
}

}  // namespace d2d
