#include <doctest.h>

#include <stdexcept>

#include <vector>

#include "sparseprox/data.hpp"
#include "sparseprox/metrics.hpp"
#include "sparseprox/network.hpp"
#include "sparseprox/prox.hpp"

using namespace sparseprox;

namespace {

NetworkModel dense_stack(const std::vector<int>& widths, int inputs, std::uint64_t seed) {
  std::vector<LayerConfig> cfg;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    const bool last = (i + 1 == widths.size());
    cfg.push_back(LayerConfig::dense(widths[i],
                                     last ? Activation::Softmax : Activation::Relu));
  }
  return build_network(InputShape{1, 1, inputs}, cfg, InitScheme::XavierNormal, seed);
}

}  // namespace

TEST_CASE("nonzero counting excludes biases") {
  NetworkModel model = dense_stack({2}, 2, 1);
  model.layers[0].bias = {5.0, 5.0};  // must not count
  Matrix& w = model.layers[0].w;
  w(0, 0) = 0.0;
  w(0, 1) = 0.0;
  w(1, 0) = 1.0;
  w(1, 1) = 2.0;
  const NonzeroCount count = count_nonzero(model);
  CHECK(count.nonzero == 2);
  CHECK(count.total == 4);
  CHECK(count.fraction == doctest::Approx(0.5));
}

TEST_CASE("fresh models are dense, zeroed models are empty") {
  NetworkModel model = dense_stack({16, 4}, 10, 2);
  CHECK(count_nonzero(model).fraction >= 0.999);
  for (Layer& layer : model.layers) {
    for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] = 0.0;
  }
  CHECK(count_nonzero(model).fraction == 0.0);
  CHECK(flop_ratio(model) == 0.0);
}

TEST_CASE("hidden neuron removal by incoming column") {
  NetworkModel model = dense_stack({2, 2}, 2, 3);
  CHECK(count_removed_neurons(model).removed == 0);
  // zero the incoming column of hidden unit 1
  model.layers[0].w(0, 1) = 0.0;
  model.layers[0].w(1, 1) = 0.0;
  const NeuronRemoval removal = count_removed_neurons(model);
  CHECK(removal.removed == 1);
  CHECK(removal.total == 2);  // only the hidden layer counts
  REQUIRE(removal.per_layer.size() == 1);
  CHECK(removal.per_layer[0] == 1);
}

TEST_CASE("hidden neuron removal by outgoing row") {
  NetworkModel model = dense_stack({3, 2}, 4, 4);
  model.layers[1].w(2, 0) = 0.0;
  model.layers[1].w(2, 1) = 0.0;
  CHECK(count_removed_neurons(model).removed == 1);
}

TEST_CASE("group prox that zeroes one outgoing row removes exactly one neuron") {
  NetworkModel model = dense_stack({3, 2}, 4, 5);
  const std::size_t before = count_removed_neurons(model).removed;
  Matrix& w = model.layers[1].w;  // 3x2, rows are hidden units' outgoing weights

  // pick beta between the smallest row norm and the rest
  double norms[3];
  for (int i = 0; i < 3; ++i) {
    norms[i] = std::sqrt(w(i, 0) * w(i, 0) + w(i, 1) * w(i, 1));
  }
  int smallest = 0;
  for (int i = 1; i < 3; ++i) {
    if (norms[i] < norms[smallest]) smallest = i;
  }
  double second = 1e300;
  for (int i = 0; i < 3; ++i) {
    if (i != smallest) second = std::min(second, norms[i]);
  }
  const double beta = 0.5 * (norms[smallest] + second);

  w = group_prox(std::move(w), GroupPartition::dense_row_groups(3, 2), beta);
  const NeuronRemoval removal = count_removed_neurons(model);
  CHECK(removal.removed == before + 1);
}

TEST_CASE("conv filter removal") {
  const std::vector<LayerConfig> cfg{LayerConfig::conv2d(3, 2, Activation::Relu),
                                     LayerConfig::dense(2, Activation::Softmax)};
  NetworkModel model = build_network(InputShape{3, 3, 1}, cfg, InitScheme::XavierNormal, 6);
  CHECK(count_removed_neurons(model).total == 3);  // three filters
  for (int t = 0; t < 4; ++t) model.layers[0].w(1, t) = 0.0;
  const NeuronRemoval removal = count_removed_neurons(model);
  CHECK(removal.removed == 1);
  CHECK(removal.per_layer[0] == 1);
}

TEST_CASE("flop ratio on dense and half-zero models") {
  NetworkModel model = dense_stack({4, 2}, 6, 7);
  CHECK(flop_ratio(model) == doctest::Approx(1.0));

  // checkerboard: half the weights die but no full row or column does
  for (Layer& layer : model.layers) {
    for (int r = 0; r < layer.w.rows(); ++r) {
      for (int c = 0; c < layer.w.cols(); ++c) {
        if ((r + c) % 2 == 0) layer.w(r, c) = 0.0;
      }
    }
  }
  REQUIRE(count_removed_neurons(model).removed == 0);
  CHECK(flop_ratio(model) == doctest::Approx(0.5));
}

TEST_CASE("removing a neuron never increases the ratios") {
  NetworkModel model = dense_stack({5, 3}, 4, 8);
  const double f0 = flop_ratio(model);
  const double nz0 = count_nonzero(model).fraction;
  for (int i = 0; i < 4; ++i) model.layers[0].w(i, 2) = 0.0;
  CHECK(flop_ratio(model) <= f0);
  CHECK(count_nonzero(model).fraction <= nz0);
  CHECK(count_removed_neurons(model).removed == 1);
}

TEST_CASE("accuracy with tie-break toward the smallest class") {
  NetworkModel model = dense_stack({10}, 3, 9);
  for (std::size_t i = 0; i < model.layers[0].w.size(); ++i) model.layers[0].w[i] = 0.0;
  // uniform predictions: every sample lands on class 0
  const Dataset data = synthetic_classification(200, 5, 0, 10, 10);
  double class0 = 0.0;
  for (const int label : data.labels) {
    if (label == 0) class0 += 1.0;
  }

  Dataset three = data;
  three.features = Matrix(200, 3);
  for (int n = 0; n < 200; ++n) {
    for (int i = 0; i < 3; ++i) three.features(n, i) = data.features(n, i);
  }
  three.shape = InputShape{1, 1, 3};
  CHECK(accuracy(model, three) == doctest::Approx(class0 / 200.0));
}

TEST_CASE("perfect and single-sample accuracy") {
  // hand-built separator: class = sign of x0
  const std::vector<LayerConfig> cfg{LayerConfig::dense(2, Activation::Softmax)};
  NetworkModel model = build_network(InputShape{1, 1, 1}, cfg, InitScheme::XavierNormal, 11);
  model.layers[0].w(0, 0) = -5.0;
  model.layers[0].w(0, 1) = 5.0;

  Dataset data;
  data.shape = InputShape{1, 1, 1};
  data.num_classes = 2;
  data.features = Matrix::from_rows({{-1.0}, {1.0}, {-2.0}, {0.5}});
  data.labels = {0, 1, 0, 1};
  CHECK(accuracy(model, data) == 1.0);

  Dataset single;
  single.shape = data.shape;
  single.num_classes = 2;
  single.features = Matrix::from_rows({{2.0}});
  single.labels = {1};
  CHECK(accuracy(model, single) == 1.0);

  Dataset empty;
  empty.num_classes = 2;
  CHECK_THROWS_AS((void)accuracy(model, empty), std::invalid_argument);
}

TEST_CASE("sparsity report invariants") {
  NetworkModel model = dense_stack({8, 3}, 5, 12);
  const Dataset data = synthetic_classification(60, 5, 0, 3, 13);
  const SparsityReport report = sparsity_report(model, data);
  CHECK(report.neurons_removed <= report.neurons_total);
  CHECK(report.nonzero_fraction >= 0.0);
  CHECK(report.nonzero_fraction <= 1.0);
  CHECK(report.flop_ratio >= 0.0);
  CHECK(report.flop_ratio <= 1.0);
  CHECK(report.accuracy >= 0.0);
  CHECK(report.accuracy <= 1.0);
  CHECK(report.neurons_total == 8);
}
