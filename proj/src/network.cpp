#include "sparseprox/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace sparseprox {

namespace {

constexpr double kProbFloor = 1e-12;

[[noreturn]] void layer_error(std::size_t index, const std::string& what) {
  throw std::invalid_argument("layer " + std::to_string(index + 1) + ": " + what);
}

void fill_normal(Matrix& w, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = dist(rng);
}

void apply_activation(Activation act, const Matrix& pre, Matrix& post) {
  post = pre;
  switch (act) {
    case Activation::Identity:
      return;
    case Activation::Relu:
      for (std::size_t i = 0; i < post.size(); ++i) post[i] = std::max(0.0, post[i]);
      return;
    case Activation::Softmax:
      for (std::size_t n = 0; n < post.rows(); ++n) {
        double m = post(n, 0);
        for (std::size_t j = 1; j < post.cols(); ++j) m = std::max(m, post(n, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < post.cols(); ++j) {
          post(n, j) = std::exp(post(n, j) - m);
          sum += post(n, j);
        }
        for (std::size_t j = 0; j < post.cols(); ++j) post(n, j) /= sum;
      }
      return;
  }
}

}  // namespace

const char* layer_kind_name(LayerKind kind) {
  return kind == LayerKind::Dense ? "dense" : "conv2d";
}

const char* activation_name(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

const char* init_scheme_name(InitScheme scheme) {
  return scheme == InitScheme::XavierNormal ? "xavier-normal" : "normal-0.05";
}

NetworkModel build_network(const InputShape& input, std::span<const LayerConfig> configs,
                           InitScheme scheme, std::uint64_t seed) {
  if (input.height <= 0 || input.width <= 0 || input.channels <= 0) {
    throw std::invalid_argument("input shape must be positive in every dimension");
  }
  if (configs.empty()) throw std::invalid_argument("network needs at least one layer");

  NetworkModel model;
  model.input = input;
  model.layers.reserve(configs.size());

  std::mt19937_64 rng(seed);
  InputShape cur = input;
  bool seen_dense = false;

  for (std::size_t l = 0; l < configs.size(); ++l) {
    const LayerConfig& cfg = configs[l];
    if (cfg.activation == Activation::Softmax && l + 1 != configs.size()) {
      layer_error(l, "softmax is only allowed on the final layer");
    }

    Layer layer;
    layer.kind = cfg.kind;
    layer.activation = cfg.activation;
    layer.input_len = cur.flat();

    if (cfg.kind == LayerKind::Dense) {
      if (cfg.units <= 0) layer_error(l, "dense layer needs a positive width");
      layer.w = Matrix(layer.input_len, static_cast<std::size_t>(cfg.units));
      layer.bias.assign(static_cast<std::size_t>(cfg.units), 0.0);
      layer.output_len = static_cast<std::size_t>(cfg.units);
      const double sigma =
          scheme == InitScheme::XavierNormal
              ? std::sqrt(2.0 / (static_cast<double>(layer.input_len) + cfg.units))
              : 0.05;
      fill_normal(layer.w, sigma, rng);
      cur = InputShape{1, 1, cfg.units};
      seen_dense = true;
    } else {
      if (seen_dense) layer_error(l, "convolution cannot follow a dense layer");
      if (cfg.filters <= 0 || cfg.kernel <= 0) {
        layer_error(l, "convolution needs positive filter count and window");
      }
      if (cfg.kernel > cur.height || cfg.kernel > cur.width) {
        layer_error(l, "convolution window larger than its input");
      }
      layer.conv = kernels::ConvDims{cur.height, cur.width, cur.channels, cfg.kernel,
                                     cfg.filters};
      const std::size_t taps =
          static_cast<std::size_t>(cfg.kernel) * cfg.kernel * cur.channels;
      layer.w = Matrix(static_cast<std::size_t>(cfg.filters), taps);
      layer.bias.assign(static_cast<std::size_t>(cfg.filters), 0.0);
      layer.output_len =
          static_cast<std::size_t>(layer.conv.out_h()) * layer.conv.out_w() * cfg.filters;
      const double fan_in = static_cast<double>(taps);
      const double fan_out = static_cast<double>(cfg.kernel) * cfg.kernel * cfg.filters;
      const double sigma =
          scheme == InitScheme::XavierNormal ? std::sqrt(2.0 / (fan_in + fan_out)) : 0.05;
      fill_normal(layer.w, sigma, rng);
      cur = InputShape{layer.conv.out_h(), layer.conv.out_w(), cfg.filters};
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

Matrix forward(const NetworkModel& model, const Matrix& x, ForwardCache* cache) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (x.cols() != model.input.flat()) {
    throw std::invalid_argument("batch width does not match the model input shape");
  }
  if (cache) {
    cache->pre.assign(model.layers.size(), Matrix());
    cache->post.assign(model.layers.size(), Matrix());
  }

  Matrix cur = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    Matrix pre;
    if (layer.kind == LayerKind::Dense) {
      kernels::dense_forward(cur, layer.w, layer.bias, pre);
    } else {
      kernels::conv2d_forward(cur, layer.conv, layer.w, layer.bias, pre);
    }
    Matrix post;
    apply_activation(layer.activation, pre, post);
    if (cache) {
      cache->pre[l] = pre;
      cache->post[l] = post;
    }
    cur = std::move(post);
  }
  return cur;
}

double loss_and_grads(const NetworkModel& model, const Matrix& x, const Matrix& y_onehot,
                      Gradients& grads, Matrix* probs_out) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (model.layers.back().activation != Activation::Softmax) {
    throw std::invalid_argument("cross-entropy loss requires a softmax final layer");
  }
  if (y_onehot.rows() != x.rows() || y_onehot.cols() != model.output_dim()) {
    throw std::invalid_argument("one-hot labels do not match the batch or output width");
  }
  if (x.rows() == 0) throw std::invalid_argument("empty batch");

  ForwardCache cache;
  const Matrix probs = forward(model, x, &cache);
  const double inv_n = 1.0 / static_cast<double>(x.rows());

  double loss = 0.0;
  for (std::size_t n = 0; n < probs.rows(); ++n) {
    for (std::size_t k = 0; k < probs.cols(); ++k) {
      if (y_onehot(n, k) != 0.0) {
        loss -= y_onehot(n, k) * std::log(std::max(probs(n, k), kProbFloor));
      }
    }
  }
  loss *= inv_n;

  const std::size_t depth = model.layers.size();
  grads.dw.assign(depth, Matrix());
  grads.db.assign(depth, std::vector<double>());

  // Softmax and cross-entropy combine into (p - y) / N at the output.
  Matrix dpost(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < dpost.size(); ++i) {
    dpost[i] = (probs[i] - y_onehot[i]) * inv_n;
  }

  for (std::size_t l = depth; l-- > 0;) {
    const Layer& layer = model.layers[l];
    Matrix dpre;
    if (l + 1 == depth) {
      dpre = std::move(dpost);
    } else if (layer.activation == Activation::Relu) {
      dpre = dpost;
      const Matrix& pre = cache.pre[l];
      for (std::size_t i = 0; i < dpre.size(); ++i) {
        if (pre[i] <= 0.0) dpre[i] = 0.0;
      }
    } else {
      dpre = std::move(dpost);
    }

    const Matrix& in = (l == 0) ? x : cache.post[l - 1];
    if (layer.kind == LayerKind::Dense) {
      kernels::dense_grad_weights(in, dpre, grads.dw[l]);
      kernels::dense_grad_bias(dpre, grads.db[l]);
      if (l > 0) kernels::dense_grad_input(dpre, layer.w, dpost);
    } else {
      kernels::conv2d_grad_weights(in, layer.conv, dpre, grads.dw[l]);
      kernels::conv2d_grad_bias(dpre, layer.conv, grads.db[l]);
      if (l > 0) kernels::conv2d_grad_input(dpre, layer.conv, layer.w, dpost);
    }
  }

  if (probs_out) *probs_out = probs;
  return loss;
}

double cross_entropy_loss(const NetworkModel& model, const Matrix& x, const Matrix& y_onehot) {
  if (model.layers.empty()) throw std::invalid_argument("model has no layers");
  if (model.layers.back().activation != Activation::Softmax) {
    throw std::invalid_argument("cross-entropy loss requires a softmax final layer");
  }
  if (y_onehot.rows() != x.rows() || y_onehot.cols() != model.output_dim()) {
    throw std::invalid_argument("one-hot labels do not match the batch or output width");
  }
  if (x.rows() == 0) throw std::invalid_argument("empty batch");
  const Matrix probs = forward(model, x);
  double loss = 0.0;
  for (std::size_t n = 0; n < probs.rows(); ++n) {
    for (std::size_t k = 0; k < probs.cols(); ++k) {
      if (y_onehot(n, k) != 0.0) {
        loss -= y_onehot(n, k) * std::log(std::max(probs(n, k), kProbFloor));
      }
    }
  }
  return loss / static_cast<double>(x.rows());
}

}  // namespace sparseprox
