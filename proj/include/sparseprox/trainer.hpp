#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparseprox/data.hpp"
#include "sparseprox/matrix.hpp"
#include "sparseprox/network.hpp"
#include "sparseprox/prox.hpp"

namespace sparseprox {

enum class Optimizer { Sgd, Adam };
enum class RegularizerMode { None, L2, L1, GroupOnly, TL1Only, SGL, IntegratedTL1 };

const char* optimizer_name(Optimizer opt);
const char* regularizer_mode_name(RegularizerMode mode);

struct TrainConfig {
  double lambda = 0.0;        // regularization weight
  double s = 0.25;            // schedule endpoint, mu ranges over [s, 1-s]
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t max_iterations = 0;  // cap on minibatch steps; 0 trains nothing
  double loss_delta_tol = 1e-5;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Sgd;
  RegularizerMode mode = RegularizerMode::None;
  double a = 1.0;  // transformed-l1 shape
};

/// Throws std::invalid_argument on out-of-range fields or a batch size larger
/// than the training set.
void validate(const TrainConfig& config, std::size_t train_size);

/// Per-layer mix between the elementwise and the group penalty, linear from s
/// at the first layer to 1-s at the last. A single-layer net uses 0.5.
double mu_schedule(std::size_t l, std::size_t layer_count, double s);

struct TraceRow {
  std::size_t iteration = 0;  // minibatch steps completed
  double loss = 0.0;          // epoch-averaged minibatch loss
  double accuracy = 0.0;      // on the training split
  double nonzero_fraction = 0.0;
  double flop_ratio = 0.0;
  std::size_t neurons_removed = 0;
};
using TrainTrace = std::vector<TraceRow>;

void write_trace_csv(const std::string& path, const TrainTrace& trace);

/// Thrown when the minibatch loss goes non-finite (learning rate too large).
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected adaptive moment step. Updates the moment buffers in
/// place and writes the signed parameter increment (already scaled by
/// -gamma) into step_out. t counts steps starting at 1.
void adam_step(std::span<double> m, std::span<double> v, std::size_t t,
               std::span<const double> grad, double gamma, const AdamParams& params,
               std::span<double> step_out);

struct LayerAdamState {
  Matrix m_w, v_w;
  std::vector<double> m_b, v_b;
};

struct TrainerState {
  std::vector<LayerAdamState> layers;
  std::size_t t = 0;
};

TrainerState init_trainer_state(const NetworkModel& model);

/// Gradient step then the mode's prox for one weight matrix (the inner update
/// of the training loop, exposed so it can be exercised directly). mu is the
/// layer's schedule value; adam buffers are required iff optimizer is Adam,
/// with t the post-increment step count.
void update_weights(Matrix& w, const Matrix& grad, const GroupPartition& partition,
                    double mu, const TrainConfig& config, Matrix* adam_m, Matrix* adam_v,
                    std::size_t t);

/// One minibatch step over every layer: backprop, optimizer step, prox on
/// weights, plain step on biases. Returns the minibatch loss. Throws
/// DivergenceError when the loss is non-finite.
double train_step(NetworkModel& model, const Matrix& batch_x, const Matrix& batch_y,
                  const TrainConfig& config, TrainerState& state, std::size_t iteration);

/// Epoch ordering as a pure function of (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch);

struct TrainResult {
  NetworkModel model;
  TrainTrace trace;
};

/// Runs minibatch proximal gradient descent until the epoch-averaged loss
/// moves less than loss_delta_tol or max_iterations minibatch steps have run.
/// One trace row is recorded per epoch. Deterministic given config and seed.
TrainResult train(NetworkModel model, const Dataset& train_data, const TrainConfig& config);

}  // namespace sparseprox
