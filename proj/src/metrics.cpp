#include "sparseprox/metrics.hpp"

#include <stdexcept>

namespace sparseprox {

namespace {

bool column_all_zero(const Matrix& w, std::size_t j) {
  for (std::size_t i = 0; i < w.rows(); ++i) {
    if (w(i, j) != 0.0) return false;
  }
  return true;
}

bool row_all_zero(const Matrix& w, std::size_t i) {
  for (std::size_t j = 0; j < w.cols(); ++j) {
    if (w(i, j) != 0.0) return false;
  }
  return true;
}

/// Alive flags for the outputs of layer l, at unit granularity for dense
/// layers and channel granularity for conv layers.
std::vector<std::vector<bool>> alive_flags(const NetworkModel& model) {
  std::vector<std::vector<bool>> alive(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const bool is_final = (l + 1 == model.layers.size());
    if (layer.kind == LayerKind::Dense) {
      alive[l].assign(layer.output_len, true);
      if (is_final) continue;
      const Layer& next = model.layers[l + 1];
      for (std::size_t j = 0; j < layer.output_len; ++j) {
        const bool no_in = column_all_zero(layer.w, j);
        const bool no_out = next.kind == LayerKind::Dense && row_all_zero(next.w, j);
        if (no_in || no_out) alive[l][j] = false;
      }
    } else {
      const std::size_t filters = static_cast<std::size_t>(layer.conv.filters);
      alive[l].assign(filters, true);
      if (is_final) continue;
      for (std::size_t f = 0; f < filters; ++f) {
        if (row_all_zero(layer.w, f)) alive[l][f] = false;
      }
    }
  }
  return alive;
}

bool input_unit_alive(const NetworkModel& model, std::size_t l,
                      const std::vector<std::vector<bool>>& alive, std::size_t unit) {
  if (l == 0) return true;
  const Layer& prev = model.layers[l - 1];
  if (prev.kind == LayerKind::Dense) return alive[l - 1][unit];
  const std::size_t filters = static_cast<std::size_t>(prev.conv.filters);
  return alive[l - 1][unit % filters];
}

}  // namespace

NonzeroCount count_nonzero(const NetworkModel& model) {
  NonzeroCount out;
  for (const Layer& layer : model.layers) {
    out.total += layer.w.size();
    for (std::size_t i = 0; i < layer.w.size(); ++i) {
      if (layer.w[i] != 0.0) ++out.nonzero;
    }
  }
  out.fraction = out.total == 0 ? 0.0 : static_cast<double>(out.nonzero) / out.total;
  return out;
}

NeuronRemoval count_removed_neurons(const NetworkModel& model) {
  NeuronRemoval out;
  if (model.layers.size() < 2) return out;
  const auto alive = alive_flags(model);
  out.per_layer.reserve(model.layers.size() - 1);
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    std::size_t removed = 0;
    for (const bool a : alive[l]) {
      if (!a) ++removed;
    }
    out.per_layer.push_back(removed);
    out.removed += removed;
    out.total += alive[l].size();
  }
  return out;
}

double flop_ratio(const NetworkModel& model) {
  const auto alive = alive_flags(model);
  double used = 0.0;
  double dense_total = 0.0;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    if (layer.kind == LayerKind::Dense) {
      dense_total += static_cast<double>(layer.w.rows()) * layer.w.cols();
      for (std::size_t i = 0; i < layer.w.rows(); ++i) {
        if (!input_unit_alive(model, l, alive, i)) continue;
        for (std::size_t j = 0; j < layer.w.cols(); ++j) {
          if (layer.w(i, j) != 0.0 && alive[l][j]) used += 1.0;
        }
      }
    } else {
      const double positions =
          static_cast<double>(layer.conv.out_h()) * layer.conv.out_w();
      dense_total += positions * static_cast<double>(layer.w.rows()) * layer.w.cols();
      const std::size_t in_c = static_cast<std::size_t>(layer.conv.in_c);
      for (std::size_t f = 0; f < layer.w.rows(); ++f) {
        if (!alive[l][f]) continue;
        for (std::size_t t = 0; t < layer.w.cols(); ++t) {
          if (layer.w(f, t) == 0.0) continue;
          if (!input_unit_alive(model, l, alive, t % in_c)) continue;
          used += positions;
        }
      }
    }
  }
  return dense_total == 0.0 ? 0.0 : used / dense_total;
}

double accuracy(const NetworkModel& model, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("accuracy needs a non-empty dataset");
  const Matrix probs = forward(model, data.features);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < probs.rows(); ++n) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.cols(); ++j) {
      if (probs(n, j) > probs(n, best)) best = j;
    }
    if (static_cast<int>(best) == data.labels[n]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

SparsityReport sparsity_report(const NetworkModel& model, const Dataset& data) {
  SparsityReport report;
  report.nonzero_fraction = count_nonzero(model).fraction;
  const NeuronRemoval removal = count_removed_neurons(model);
  report.neurons_total = removal.total;
  report.neurons_removed = removal.removed;
  report.flop_ratio = flop_ratio(model);
  report.accuracy = accuracy(model, data);
  return report;
}

}  // namespace sparseprox
