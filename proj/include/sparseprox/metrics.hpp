#pragma once

#include <cstddef>
#include <vector>

#include "sparseprox/data.hpp"
#include "sparseprox/network.hpp"

namespace sparseprox {

struct NonzeroCount {
  std::size_t nonzero = 0;
  std::size_t total = 0;
  double fraction = 0.0;
};

/// Bitwise-nonzero weight count over every layer; biases are not weights and
/// are excluded from both numerator and denominator.
NonzeroCount count_nonzero(const NetworkModel& model);

struct NeuronRemoval {
  std::vector<std::size_t> per_layer;  // removed hidden units per non-final layer
  std::size_t removed = 0;
  std::size_t total = 0;  // hidden units (dense widths and conv filter counts)
};

/// A hidden dense unit is removed when its incoming column or its outgoing
/// row in the next dense layer is exactly zero. A conv filter is removed when
/// every one of its taps is zero. Input and output units never count.
NeuronRemoval count_removed_neurons(const NetworkModel& model);

/// Forward-pass multiply-accumulate count, skipping zero weights and any
/// connection into or out of a removed unit, over the fully dense count.
/// Activation costs are excluded; the conventional 2x for multiply plus add
/// cancels in the ratio.
double flop_ratio(const NetworkModel& model);

/// Fraction of samples whose argmax output matches the label; ties resolve
/// to the smallest class index. Throws on an empty dataset.
double accuracy(const NetworkModel& model, const Dataset& data);

struct SparsityReport {
  double nonzero_fraction = 0.0;
  std::size_t neurons_total = 0;
  std::size_t neurons_removed = 0;
  double flop_ratio = 0.0;
  double accuracy = 0.0;
};

SparsityReport sparsity_report(const NetworkModel& model, const Dataset& data);

}  // namespace sparseprox
