#include <doctest.h>

#include <cmath>

#include "d2d/dnn.hpp"
#include "d2d/errors.hpp"

using namespace d2d;

namespace {

NetworkConfig small(int width = 8, int depth = 2, int out = 2) {
  NetworkConfig c;
  c.width = width;
  c.depth = depth;
  c.output_size = out;
  return c;
}

Eigen::MatrixXd random_inputs(int rows, Rng& rng, double span = 500.0) {
  Eigen::MatrixXd x(rows, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-span, span);
  return x;
}

}  // namespace

TEST_CASE("xavier ranges") {
  CHECK(xavier_range(4, 1500) == doctest::Approx(0.063162).epsilon(1e-5));
  CHECK(xavier_range(1500, 1500) == doctest::Approx(0.044721).epsilon(1e-5));
  CHECK(xavier_range(1500, 8) == doctest::Approx(std::sqrt(6.0 / 1508.0)));
}

TEST_CASE("xavier samples are bounded with variance r^2/3") {
  Rng rng(3);
  const Eigen::MatrixXd w = xavier_init(1000, 1000, rng);
  const double r = xavier_range(1000, 1000);
  CHECK(w.cwiseAbs().maxCoeff() < r);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  CHECK(std::abs(mean) < 1e-3 * r);
  CHECK(var == doctest::Approx(r * r / 3.0).epsilon(0.02));
}

TEST_CASE("init network shapes and identity scale/shift") {
  Rng rng(1);
  const NetworkConfig c = small(16, 3, 4);
  const NetworkParams p = init_network(c, rng);
  REQUIRE(p.layers.size() == 4);
  CHECK(p.layers[0].weights.rows() == 4);
  CHECK(p.layers[0].weights.cols() == 16);
  CHECK(p.layers[3].weights.rows() == 16);
  CHECK(p.layers[3].weights.cols() == 4);
  for (const auto& l : p.layers) {
    CHECK(l.scale.isOnes());
    CHECK(l.shift.isZero());
  }
  CHECK(p.parameter_count() == 4 * 16 + 16 * 16 * 2 + 16 * 4 + 2 * (16 * 3 + 4));
  const BatchNormStats s = init_stats(c);
  CHECK(s.mean[0].isZero());
  CHECK(s.var[0].isOnes());
}

TEST_CASE("invalid configs are rejected") {
  NetworkConfig c = small();
  c.width = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small();
  c.out_min_dbm = 30.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zero-centered output layer maps to the midpoint") {
  // S = 0, Z = 0: sigmoid(0) = 0.5 -> 0.5 * 170 - 150.
  Rng rng(4);
  NetworkParams p = init_network(small(), rng);
  p.layers.back().scale.setZero();
  const Eigen::MatrixXd x = random_inputs(16, rng);
  const ForwardResult r = forward(p, x, Mode::train, init_stats(p.config));
  CHECK((r.powers_dbm.array() - (-65.0)).abs().maxCoeff() < 1e-9);
}

TEST_CASE("train mode normalizes each feature over the batch") {
  Rng rng(5);
  const NetworkParams p = init_network(small(32, 2, 3), rng);
  const Eigen::MatrixXd x = random_inputs(64, rng);
  const ForwardResult r = forward(p, x, Mode::train, init_stats(p.config));
  for (const auto& lc : r.cache.layers) {
    const Eigen::RowVectorXd mean = lc.normalized.colwise().mean();
    const Eigen::RowVectorXd var =
        (lc.normalized.rowwise() - mean).array().square().colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::ArrayXd expect =
        lc.batch_var.array() / (lc.batch_var.array() + p.config.bn_epsilon);
    CHECK((var.transpose().array() - expect).abs().maxCoeff() < 1e-9);
    CHECK((var.array() - 1.0).abs().maxCoeff() < 1e-2);
  }
}

TEST_CASE("outputs lie strictly inside the power range") {
  Rng rng(6);
  NetworkParams p = init_network(small(), rng);
  p.layers.back().scale.setConstant(1e4);  // saturate the sigmoid
  const Eigen::MatrixXd x = random_inputs(200, rng, 1000.0);
  for (Mode m : {Mode::train, Mode::infer}) {
    const ForwardResult r = forward(p, x, m, init_stats(p.config));
    CHECK(r.powers_dbm.minCoeff() > -150.0);
    CHECK(r.powers_dbm.maxCoeff() < 20.0);
    CHECK(r.powers_dbm.allFinite());
  }
}

TEST_CASE("infer mode treats rows independently") {
  Rng rng(7);
  const NetworkParams p = init_network(small(), rng);
  BatchNormStats s = init_stats(p.config);
  const Eigen::MatrixXd x = random_inputs(10, rng);
  const ForwardResult warm = forward(p, x, Mode::train, s);
  update_running_stats(s, warm.cache);
  const Eigen::MatrixXd all = predict(p, s, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::MatrixXd one = predict(p, s, x.row(i));
    CHECK((one.row(0) - all.row(i)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("train mode needs two rows") {
  Rng rng(8);
  const NetworkParams p = init_network(small(), rng);
  CHECK_THROWS_AS(forward(p, random_inputs(1, rng), Mode::train, init_stats(p.config)), ShapeError);
  CHECK_THROWS_AS(forward(p, Eigen::MatrixXd::Zero(3, 5), Mode::infer, init_stats(p.config)),
                  ShapeError);
}

TEST_CASE("forward is pure") {
  Rng rng(9);
  const NetworkParams p = init_network(small(), rng);
  const BatchNormStats s = init_stats(p.config);
  const Eigen::MatrixXd x = random_inputs(12, rng);
  const Eigen::MatrixXd a = forward(p, x, Mode::train, s).powers_dbm;
  const Eigen::MatrixXd b = forward(p, x, Mode::train, s).powers_dbm;
  CHECK(a == b);
  CHECK(s.mean[0].isZero());
}

TEST_CASE("running stats follow the exponential update") {
  Rng rng(10);
  const NetworkParams p = init_network(small(), rng);
  BatchNormStats s = init_stats(p.config, 0.9);
  const ForwardResult r = forward(p, random_inputs(8, rng), Mode::train, s);
  update_running_stats(s, r.cache);
  const Eigen::VectorXd expect_mean = 0.1 * r.cache.layers[0].batch_mean;
  CHECK((s.mean[0] - expect_mean).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd expect_var =
      (0.9 + 0.1 * r.cache.layers[0].batch_var.array()).matrix();
  CHECK(((s.var[0] - expect_var).array() / expect_var.array()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("backward against central differences of forward") {
  // Oracle: finite differences of sum(G .* forward(theta)) for a fixed G.
  Rng rng(11);
  NetworkParams p = init_network(small(6, 2, 3), rng);
  for (auto& l : p.layers) {
    for (Eigen::Index i = 0; i < l.scale.size(); ++i) {
      l.scale(i) = rng.uniform(0.5, 1.5);
      l.shift(i) = rng.uniform(-0.5, 0.5);
    }
  }
  const BatchNormStats s = init_stats(p.config);
  const Eigen::MatrixXd x = random_inputs(5, rng);
  Eigen::MatrixXd g(5, 3);
  for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.uniform(-1.0, 1.0);
  auto f = [&](const NetworkParams& q) {
    return (forward(q, x, Mode::train, s).powers_dbm.array() * g.array()).sum();
  };
  const ForwardResult r = forward(p, x, Mode::train, s);
  Gradients grads = backward(p, r.cache, g);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto check = [&](auto member) {
      auto& t = member(p.layers[l]);
      const auto& a = member(grads.layers[l]);
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double keep = t(i);
        t(i) = keep + h;
        const double up = f(p);
        t(i) = keep - h;
        const double dn = f(p);
        t(i) = keep;
        const double n = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(a(i) - n) / std::max(1.0, std::abs(a(i)) + std::abs(n)));
      }
    };
    check([](LayerParams& lp) -> Eigen::MatrixXd& { return lp.weights; });
    check([](LayerParams& lp) -> Eigen::VectorXd& { return lp.scale; });
    check([](LayerParams& lp) -> Eigen::VectorXd& { return lp.shift; });
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient helpers") {
  Rng rng(12);
  const NetworkParams p = init_network(small(), rng);
  Gradients g = Gradients::zeros_like(p);
  CHECK(g.max_abs() == 0.0);
  CHECK(g.all_finite());
  g.layers[1].shift(0) = -3.0;
  CHECK(g.max_abs() == 3.0);
  g.layers[0].weights(0, 0) = std::nan("");
  CHECK_FALSE(g.all_finite());
}
