#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sparseprox/matrix.hpp"
#include "sparseprox/network.hpp"

namespace sparseprox {

/// A labeled set of samples, one flattened sample per feature row.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;
  InputShape shape;
  std::size_t size() const { return labels.size(); }
};

/// Reads an IDX image/label pair (the MNIST container format). Pixels are
/// scaled to [0, 1]. Throws std::runtime_error naming the file on bad magic
/// numbers, truncation, or mismatched counts.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Reads a headerless CSV with the integer label in the first column. The
/// class count is one past the largest label seen. Errors report the
/// offending line number.
Dataset load_csv(const std::string& path);

/// Writes a dataset in the same CSV layout at full double precision.
void save_csv(const std::string& path, const Dataset& data);

/// Draws class-balanced Gaussian clusters: label k has mean 3 along
/// informative coordinate k mod informative, zero elsewhere, unit variance
/// everywhere. Trailing noise coordinates are pure N(0, 1).
Dataset synthetic_classification(std::size_t samples, int informative, int noise,
                                 int num_classes, std::uint64_t seed);

Matrix one_hot(const std::vector<int>& labels, int num_classes);

/// Seeded shuffle, then a floor(fraction * n) / remainder split.
std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double train_fraction,
                                             std::uint64_t seed);

}  // namespace sparseprox
