#include "sparseprox/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "sparseprox/metrics.hpp"

namespace sparseprox {

namespace {

GroupPartition layer_partition(const Layer& layer) {
  if (layer.kind == LayerKind::Dense) {
    return GroupPartition::dense_row_groups(static_cast<int>(layer.w.rows()),
                                            static_cast<int>(layer.w.cols()));
  }
  return GroupPartition::conv_filter_groups(static_cast<int>(layer.w.rows()),
                                            static_cast<int>(layer.w.cols()));
}

}  // namespace

const char* optimizer_name(Optimizer opt) {
  return opt == Optimizer::Sgd ? "sgd" : "adam";
}

const char* regularizer_mode_name(RegularizerMode mode) {
  switch (mode) {
    case RegularizerMode::None: return "none";
    case RegularizerMode::L2: return "l2";
    case RegularizerMode::L1: return "l1";
    case RegularizerMode::GroupOnly: return "group";
    case RegularizerMode::TL1Only: return "tl1";
    case RegularizerMode::SGL: return "sgl";
    case RegularizerMode::IntegratedTL1: return "integrated-tl1";
  }
  return "?";
}

void validate(const TrainConfig& config, std::size_t train_size) {
  if (!(config.lambda >= 0.0) || !std::isfinite(config.lambda)) {
    throw std::invalid_argument("lambda must be finite and nonnegative");
  }
  if (!(config.s >= 0.0 && config.s <= 0.5)) {
    throw std::invalid_argument("s must lie in [0, 0.5]");
  }
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("learning rate must be finite and nonnegative");
  }
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (config.batch_size > train_size) {
    throw std::invalid_argument("batch size exceeds the training set size");
  }
  if (!(config.loss_delta_tol >= 0.0)) {
    throw std::invalid_argument("loss delta tolerance must be nonnegative");
  }
  if (!(config.a > 0.0) || !std::isfinite(config.a)) {
    throw std::invalid_argument("shape parameter a must be finite and positive");
  }
}

double mu_schedule(std::size_t l, std::size_t layer_count, double s) {
  if (!(s >= 0.0 && s <= 0.5)) throw std::invalid_argument("s must lie in [0, 0.5]");
  if (layer_count == 0 || l == 0 || l > layer_count) {
    throw std::invalid_argument("layer index outside 1..layer count");
  }
  if (layer_count == 1) return 0.5;
  return s + (1.0 - 2.0 * s) * static_cast<double>(l - 1) /
                 static_cast<double>(layer_count - 1);
}

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "iteration,loss,accuracy,nonzero_fraction,flop_ratio,neurons_removed\n";
  char buf[256];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%zu\n", row.iteration,
                  row.loss, row.accuracy, row.nonzero_fraction, row.flop_ratio,
                  row.neurons_removed);
    out << buf;
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

void adam_step(std::span<double> m, std::span<double> v, std::size_t t,
               std::span<const double> grad, double gamma, const AdamParams& params,
               std::span<double> step_out) {
  if (t == 0) throw std::invalid_argument("adam step count starts at 1");
  if (m.size() != grad.size() || v.size() != grad.size() || step_out.size() != grad.size()) {
    throw std::invalid_argument("adam buffers must match the gradient length");
  }
  const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    m[i] = params.beta1 * m[i] + (1.0 - params.beta1) * grad[i];
    v[i] = params.beta2 * v[i] + (1.0 - params.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    step_out[i] = -gamma * m_hat / (std::sqrt(v_hat) + params.eps);
  }
}

TrainerState init_trainer_state(const NetworkModel& model) {
  TrainerState state;
  state.layers.reserve(model.layers.size());
  for (const Layer& layer : model.layers) {
    LayerAdamState s;
    s.m_w = Matrix(layer.w.rows(), layer.w.cols());
    s.v_w = Matrix(layer.w.rows(), layer.w.cols());
    s.m_b.assign(layer.bias.size(), 0.0);
    s.v_b.assign(layer.bias.size(), 0.0);
    state.layers.push_back(std::move(s));
  }
  return state;
}

void update_weights(Matrix& w, const Matrix& grad, const GroupPartition& partition,
                    double mu, const TrainConfig& config, Matrix* adam_m, Matrix* adam_v,
                    std::size_t t) {
  if (!w.same_shape(grad)) throw std::invalid_argument("gradient shape does not match weights");
  const double gamma = config.learning_rate;

  // Weight decay folds into the gradient; everything else is a prox after the
  // step. The lambda guard keeps lambda = 0 bitwise identical to mode None.
  const Matrix* g = &grad;
  Matrix decayed;
  if (config.mode == RegularizerMode::L2 && config.lambda > 0.0) {
    decayed = grad;
    for (std::size_t i = 0; i < decayed.size(); ++i) decayed[i] += config.lambda * w[i];
    g = &decayed;
  }

  if (config.optimizer == Optimizer::Adam) {
    if (!adam_m || !adam_v) throw std::invalid_argument("adam update needs moment buffers");
    std::vector<double> step(w.size());
    adam_step({adam_m->data(), adam_m->size()}, {adam_v->data(), adam_v->size()}, t,
              {g->data(), g->size()}, gamma, AdamParams{}, step);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += step[i];
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= gamma * (*g)[i];
  }

  const double beta = config.lambda * gamma;
  switch (config.mode) {
    case RegularizerMode::None:
    case RegularizerMode::L2:
      return;
    case RegularizerMode::L1:
      w = l1_prox(std::move(w), beta);
      return;
    case RegularizerMode::GroupOnly:
      w = group_prox(std::move(w), partition, beta);
      return;
    case RegularizerMode::TL1Only:
      w = tl1_prox_matrix(std::move(w), ProxStep{beta, config.a});
      return;
    case RegularizerMode::SGL:
      w = l1_prox(std::move(w), beta * mu);
      w = group_prox(std::move(w), partition, beta * (1.0 - mu));
      return;
    case RegularizerMode::IntegratedTL1:
      w = integrated_prox(std::move(w), partition, config.lambda, gamma, mu, config.a);
      return;
  }
}

double train_step(NetworkModel& model, const Matrix& batch_x, const Matrix& batch_y,
                  const TrainConfig& config, TrainerState& state, std::size_t iteration) {
  Gradients grads;
  const double loss = loss_and_grads(model, batch_x, batch_y, grads);
  if (!std::isfinite(loss)) {
    throw DivergenceError("loss became non-finite at iteration " + std::to_string(iteration) +
                          "; lower the learning rate");
  }

  const std::size_t depth = model.layers.size();
  std::size_t t = 0;
  if (config.optimizer == Optimizer::Adam) t = ++state.t;

  for (std::size_t l = 0; l < depth; ++l) {
    Layer& layer = model.layers[l];
    const double mu = mu_schedule(l + 1, depth, config.s);
    const GroupPartition partition = layer_partition(layer);
    Matrix* m = nullptr;
    Matrix* v = nullptr;
    if (config.optimizer == Optimizer::Adam) {
      m = &state.layers[l].m_w;
      v = &state.layers[l].v_w;
    }
    update_weights(layer.w, grads.dw[l], partition, mu, config, m, v, t);

    if (config.optimizer == Optimizer::Adam) {
      std::vector<double> step(layer.bias.size());
      adam_step(state.layers[l].m_b, state.layers[l].v_b, t, grads.db[l],
                config.learning_rate, AdamParams{}, step);
      for (std::size_t i = 0; i < layer.bias.size(); ++i) layer.bias[i] += step[i];
    } else {
      for (std::size_t i = 0; i < layer.bias.size(); ++i) {
        layer.bias[i] -= config.learning_rate * grads.db[l][i];
      }
    }
  }
  return loss;
}

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(epoch) >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

TrainResult train(NetworkModel model, const Dataset& train_data, const TrainConfig& config) {
  validate(config, train_data.size());
  if (model.output_dim() < static_cast<std::size_t>(train_data.num_classes)) {
    throw std::invalid_argument("model output narrower than the label range");
  }
  const Matrix y = one_hot(train_data.labels, static_cast<int>(model.output_dim()));

  TrainerState state = init_trainer_state(model);
  TrainTrace trace;
  std::size_t iter = 0;
  double prev_loss = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t epoch = 0; iter < config.max_iterations; ++epoch) {
    const std::vector<std::size_t> order = epoch_order(train_data.size(), config.seed, epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size() && iter < config.max_iterations;
         start += config.batch_size) {
      const std::size_t end = std::min(start + config.batch_size, order.size());
      Matrix bx(end - start, train_data.features.cols());
      Matrix by(end - start, y.cols());
      for (std::size_t n = start; n < end; ++n) {
        const std::size_t src = order[n];
        for (std::size_t i = 0; i < bx.cols(); ++i) bx(n - start, i) = train_data.features(src, i);
        for (std::size_t k = 0; k < by.cols(); ++k) by(n - start, k) = y(src, k);
      }
      loss_sum += train_step(model, bx, by, config, state, iter);
      ++batches;
      ++iter;
    }

    const double epoch_loss = loss_sum / static_cast<double>(batches);
    const SparsityReport report = sparsity_report(model, train_data);
    trace.push_back(TraceRow{iter, epoch_loss, report.accuracy, report.nonzero_fraction,
                             report.flop_ratio, report.neurons_removed});
    if (!std::isnan(prev_loss) && std::abs(epoch_loss - prev_loss) < config.loss_delta_tol) {
      break;
    }
    prev_loss = epoch_loss;
  }
  return TrainResult{std::move(model), std::move(trace)};
}

}  // namespace sparseprox
