#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sparseprox/kernels.hpp"
#include "sparseprox/matrix.hpp"

namespace sparseprox {

enum class LayerKind { Dense, Conv2D };
enum class Activation { Identity, Relu, Softmax };
enum class InitScheme { XavierNormal, NormalRandom };

const char* layer_kind_name(LayerKind kind);
const char* activation_name(Activation act);
const char* init_scheme_name(InitScheme scheme);

/// Spatial layout of one sample. Tabular data uses {1, 1, features}.
struct InputShape {
  int height = 1;
  int width = 1;
  int channels = 0;
  std::size_t flat() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
};

struct LayerConfig {
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::Relu;
  int units = 0;    // dense width
  int filters = 0;  // conv output channels
  int kernel = 0;   // conv window side

  static LayerConfig dense(int units, Activation act) {
    return {LayerKind::Dense, act, units, 0, 0};
  }
  static LayerConfig conv2d(int filters, int kernel, Activation act) {
    return {LayerKind::Conv2D, act, 0, filters, kernel};
  }
};

/// One trained layer. Dense weights are input x output; conv weights hold one
/// flattened filter per row, matching kernels::ConvDims.
struct Layer {
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::Identity;
  Matrix w;
  std::vector<double> bias;
  kernels::ConvDims conv;  // meaningful only for Conv2D
  std::size_t input_len = 0;
  std::size_t output_len = 0;
};

struct NetworkModel {
  InputShape input;
  std::vector<Layer> layers;
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().output_len; }
};

/// Builds and initializes a model. Throws std::invalid_argument naming the
/// offending layer when the stack is inconsistent (softmax off the final
/// layer, convolution after a dense layer, non-positive sizes, windows larger
/// than their input).
NetworkModel build_network(const InputShape& input, std::span<const LayerConfig> configs,
                           InitScheme scheme, std::uint64_t seed);

struct ForwardCache {
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // activation output per layer; back() is the network output
};

/// Runs the network on a batch (one flattened sample per row). When cache is
/// given, the per-layer intermediates needed for backprop are kept.
Matrix forward(const NetworkModel& model, const Matrix& x, ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;
};

/// Mean cross-entropy of a softmax-final model over a one-hot batch, plus
/// gradients for every layer. Probabilities are floored at 1e-12 inside the
/// log. Returns the loss; fills probs_out with the softmax outputs if given.
double loss_and_grads(const NetworkModel& model, const Matrix& x, const Matrix& y_onehot,
                      Gradients& grads, Matrix* probs_out = nullptr);

/// Loss only, for finite-difference checks and evaluation.
double cross_entropy_loss(const NetworkModel& model, const Matrix& x, const Matrix& y_onehot);

}  // namespace sparseprox
