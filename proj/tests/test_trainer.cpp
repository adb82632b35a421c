#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sparseprox/data.hpp"
#include "sparseprox/metrics.hpp"
#include "sparseprox/network.hpp"
#include "sparseprox/trainer.hpp"

using namespace sparseprox;

namespace {

NetworkModel two_class_net(int inputs, std::uint64_t seed) {
  const std::vector<LayerConfig> cfg{LayerConfig::dense(2, Activation::Softmax)};
  return build_network(InputShape{1, 1, inputs}, cfg, InitScheme::XavierNormal, seed);
}

bool models_equal(const NetworkModel& a, const NetworkModel& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (!(a.layers[l].w == b.layers[l].w)) return false;
    if (a.layers[l].bias != b.layers[l].bias) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("mu schedule endpoints and midpoint") {
  CHECK(mu_schedule(1, 3, 0.1) == doctest::Approx(0.1));
  CHECK(mu_schedule(2, 3, 0.1) == doctest::Approx(0.5));
  CHECK(mu_schedule(3, 3, 0.1) == doctest::Approx(0.9));
  CHECK(mu_schedule(1, 2, 0.25) == doctest::Approx(0.25));
  CHECK(mu_schedule(2, 2, 0.25) == doctest::Approx(0.75));
  CHECK(mu_schedule(1, 1, 0.3) == doctest::Approx(0.5));  // single layer
}

TEST_CASE("config validation") {
  TrainConfig ok;
  CHECK_NOTHROW(validate(ok, 100));

  TrainConfig bad = ok;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(validate(bad, 100), std::invalid_argument);

  bad = ok;
  bad.s = 0.6;
  CHECK_THROWS_AS(validate(bad, 100), std::invalid_argument);

  bad = ok;
  bad.learning_rate = -0.1;
  CHECK_THROWS_AS(validate(bad, 100), std::invalid_argument);

  bad = ok;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate(bad, 100), std::invalid_argument);

  bad = ok;
  bad.batch_size = 101;
  CHECK_THROWS_AS(validate(bad, 100), std::invalid_argument);

  bad = ok;
  bad.a = 0.0;
  CHECK_THROWS_AS(validate(bad, 100), std::invalid_argument);

  // zero learning rate and zero iteration budgets are legal no-ops
  bad = ok;
  bad.learning_rate = 0.0;
  bad.max_iterations = 0;
  CHECK_NOTHROW(validate(bad, 100));
}

TEST_CASE("l1 update by hand") {
  Matrix w = Matrix::from_rows({{1.0}});
  const Matrix grad = Matrix::from_rows({{0.2}});
  TrainConfig config;
  config.mode = RegularizerMode::L1;
  config.lambda = 0.5;
  config.learning_rate = 0.1;
  update_weights(w, grad, GroupPartition::dense_row_groups(1, 1), 0.5, config, nullptr,
                 nullptr, 0);
  // step to 0.98, then soft threshold by 0.05
  CHECK(w(0, 0) == doctest::Approx(0.93).epsilon(1e-12));
}

TEST_CASE("zero learning rate changes nothing") {
  const Matrix original = Matrix::from_rows({{0.7, -0.2}, {0.0, 1.3}});
  const Matrix grad = Matrix::from_rows({{1.0, -2.0}, {3.0, 4.0}});
  const GroupPartition partition = GroupPartition::dense_row_groups(2, 2);
  for (const RegularizerMode mode :
       {RegularizerMode::None, RegularizerMode::L2, RegularizerMode::L1,
        RegularizerMode::GroupOnly, RegularizerMode::TL1Only, RegularizerMode::SGL,
        RegularizerMode::IntegratedTL1}) {
    Matrix w = original;
    TrainConfig config;
    config.mode = mode;
    config.lambda = 0.5;
    config.learning_rate = 0.0;
    update_weights(w, grad, partition, 0.5, config, nullptr, nullptr, 0);
    CHECK(w == original);
  }
}

TEST_CASE("exact zeros stay zero under every mode") {
  const GroupPartition partition = GroupPartition::dense_row_groups(2, 2);
  for (const RegularizerMode mode :
       {RegularizerMode::None, RegularizerMode::L2, RegularizerMode::L1,
        RegularizerMode::GroupOnly, RegularizerMode::TL1Only, RegularizerMode::SGL,
        RegularizerMode::IntegratedTL1}) {
    Matrix w(2, 2, 0.0);
    const Matrix grad(2, 2, 0.0);
    TrainConfig config;
    config.mode = mode;
    config.lambda = 0.3;
    config.learning_rate = 0.1;
    update_weights(w, grad, partition, 0.5, config, nullptr, nullptr, 0);
    CHECK(w == Matrix(2, 2, 0.0));
  }
}

TEST_CASE("lambda zero trains identically to no regularizer") {
  const Dataset data = synthetic_classification(40, 4, 0, 2, 77);
  for (const Optimizer opt : {Optimizer::Sgd, Optimizer::Adam}) {
    TrainConfig config;
    config.lambda = 0.0;
    config.learning_rate = 0.05;
    config.batch_size = 10;
    config.max_iterations = 12;
    config.loss_delta_tol = 0.0;
    config.seed = 5;
    config.optimizer = opt;
    config.mode = RegularizerMode::None;

    const TrainResult base = train(two_class_net(4, 9), data, config);
    for (const RegularizerMode mode :
         {RegularizerMode::L2, RegularizerMode::L1, RegularizerMode::GroupOnly,
          RegularizerMode::TL1Only, RegularizerMode::SGL, RegularizerMode::IntegratedTL1}) {
      TrainConfig same = config;
      same.mode = mode;
      const TrainResult run = train(two_class_net(4, 9), data, same);
      CHECK(models_equal(base.model, run.model));
    }
  }
}

TEST_CASE("training is deterministic in the seed") {
  const Dataset data = synthetic_classification(40, 4, 0, 2, 78);
  TrainConfig config;
  config.lambda = 1e-3;
  config.batch_size = 10;
  config.max_iterations = 16;
  config.loss_delta_tol = 0.0;
  config.seed = 21;
  config.mode = RegularizerMode::IntegratedTL1;

  const TrainResult a = train(two_class_net(4, 3), data, config);
  const TrainResult b = train(two_class_net(4, 3), data, config);
  CHECK(models_equal(a.model, b.model));
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].loss == b.trace[i].loss);
  }

  TrainConfig other = config;
  other.seed = 22;
  const TrainResult c = train(two_class_net(4, 3), data, other);
  CHECK_FALSE(models_equal(a.model, c.model));
}

TEST_CASE("epoch order is a pure permutation") {
  const std::vector<std::size_t> a = epoch_order(50, 9, 3);
  const std::vector<std::size_t> b = epoch_order(50, 9, 3);
  CHECK(a == b);
  CHECK(epoch_order(50, 9, 4) != a);
  CHECK(epoch_order(50, 10, 3) != a);

  std::vector<std::size_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(50);
  std::iota(iota.begin(), iota.end(), std::size_t{0});
  CHECK(sorted == iota);
}

TEST_CASE("adam step behavior") {
  std::vector<double> m(1, 0.0), v(1, 0.0), step(1, 0.0);

  SUBCASE("zero gradient from rest produces no motion") {
    const std::vector<double> grad(1, 0.0);
    adam_step(m, v, 1, grad, 0.1, AdamParams{}, step);
    CHECK(step[0] == 0.0);
  }

  SUBCASE("first step moves by roughly minus gamma times the sign") {
    const std::vector<double> grad{0.5};
    adam_step(m, v, 1, grad, 0.1, AdamParams{}, step);
    CHECK(step[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(m[0] == doctest::Approx(0.05));
    CHECK(v[0] == doctest::Approx(0.00025));
  }

  SUBCASE("momentum decays once gradients stop") {
    std::vector<double> grad{1.0};
    adam_step(m, v, 1, grad, 0.1, AdamParams{}, step);
    grad[0] = 0.0;
    for (std::size_t t = 2; t <= 400; ++t) adam_step(m, v, t, grad, 0.1, AdamParams{}, step);
    CHECK(std::abs(step[0]) < 1e-6);
  }

  SUBCASE("step count starts at one") {
    const std::vector<double> grad{1.0};
    CHECK_THROWS_AS(adam_step(m, v, 0, grad, 0.1, AdamParams{}, step), std::invalid_argument);
  }

  SUBCASE("buffer sizes must agree") {
    const std::vector<double> grad{1.0, 2.0};
    CHECK_THROWS_AS(adam_step(m, v, 1, grad, 0.1, AdamParams{}, step), std::invalid_argument);
  }
}

TEST_CASE("integrated regularizer prunes noise features on separable data") {
  const int informative = 5;
  const int noise = 15;
  const Dataset data = synthetic_classification(200, informative, noise, 2, 1234);

  TrainConfig config;
  config.lambda = 0.025;
  config.learning_rate = 0.1;
  config.batch_size = 20;
  config.max_iterations = 3000;
  config.loss_delta_tol = 0.0;
  config.seed = 6;
  config.mode = RegularizerMode::IntegratedTL1;

  const TrainResult result = train(two_class_net(informative + noise, 17), data, config);
  CHECK(accuracy(result.model, data) >= 0.95);

  // rows of the first weight matrix are input features; the noise block
  // should be wiped out almost entirely
  const Matrix& w = result.model.layers[0].w;
  int dead = 0;
  for (int r = informative; r < informative + noise; ++r) {
    bool zero = true;
    for (int c = 0; c < w.cols(); ++c) {
      if (w(r, c) != 0.0) zero = false;
    }
    if (zero) ++dead;
  }
  CHECK(dead >= (noise * 8) / 10);
}

TEST_CASE("zero iteration budget returns the model untouched") {
  const Dataset data = synthetic_classification(20, 3, 0, 2, 80);
  NetworkModel model = two_class_net(3, 42);
  const NetworkModel before = model;
  TrainConfig config;
  config.batch_size = 10;
  config.max_iterations = 0;
  const TrainResult result = train(std::move(model), data, config);
  CHECK(models_equal(result.model, before));
  CHECK(result.trace.empty());
}

TEST_CASE("trace rows advance and stay in range") {
  const Dataset data = synthetic_classification(40, 4, 0, 2, 81);
  TrainConfig config;
  config.lambda = 1e-3;
  config.batch_size = 10;
  config.max_iterations = 35;  // last epoch gets a partial step count
  config.loss_delta_tol = 0.0;
  config.seed = 2;
  config.mode = RegularizerMode::TL1Only;

  const TrainResult result = train(two_class_net(4, 1), data, config);
  REQUIRE(!result.trace.empty());
  CHECK(result.trace.back().iteration == 35);
  std::size_t prev = 0;
  for (const TraceRow& row : result.trace) {
    CHECK(row.iteration > prev);
    prev = row.iteration;
    CHECK(std::isfinite(row.loss));
    CHECK(row.accuracy >= 0.0);
    CHECK(row.accuracy <= 1.0);
    CHECK(row.nonzero_fraction >= 0.0);
    CHECK(row.nonzero_fraction <= 1.0);
    CHECK(row.flop_ratio >= 0.0);
    CHECK(row.flop_ratio <= 1.0);
  }
}

TEST_CASE("early stop on a flat loss") {
  const Dataset data = synthetic_classification(20, 3, 0, 2, 82);
  TrainConfig config;
  config.learning_rate = 0.0;  // loss cannot move
  config.batch_size = 20;
  config.max_iterations = 1000;
  config.loss_delta_tol = 1e-5;
  const TrainResult result = train(two_class_net(3, 4), data, config);
  // first epoch sets the baseline, second matches it exactly, then stop
  CHECK(result.trace.size() == 2);
}

TEST_CASE("huge learning rate raises divergence") {
  const Dataset data = synthetic_classification(40, 4, 0, 2, 83);
  const std::vector<LayerConfig> cfg{LayerConfig::dense(16, Activation::Relu),
                                     LayerConfig::dense(2, Activation::Softmax)};
  NetworkModel model = build_network(InputShape{1, 1, 4}, cfg, InitScheme::XavierNormal, 7);
  TrainConfig config;
  config.learning_rate = 1e6;
  config.batch_size = 10;
  config.max_iterations = 500;
  config.loss_delta_tol = 0.0;
  CHECK_THROWS_AS((void)train(std::move(model), data, config), DivergenceError);
}

TEST_CASE("trace csv layout") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "sparseprox_trace_test.csv").string();
  TrainTrace trace;
  trace.push_back(TraceRow{10, 0.5, 1.0, 0.25, 0.125, 3});
  trace.push_back(TraceRow{20, 0.25, 0.75, 0.0625, 0.03125, 4});
  write_trace_csv(path, trace);

  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() ==
        "iteration,loss,accuracy,nonzero_fraction,flop_ratio,neurons_removed\n"
        "10,0.5,1,0.25,0.125,3\n"
        "20,0.25,0.75,0.0625,0.03125,4\n");
  std::remove(path.c_str());
}
