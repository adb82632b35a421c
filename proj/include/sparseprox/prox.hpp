#pragma once

#include <vector>

#include "sparseprox/matrix.hpp"

namespace sparseprox {

/// One proximal step. `beta` is the step weight multiplying the penalty
/// (lambda * gamma * mu_l for the transformed-l1 prox, lambda * gamma *
/// (1 - mu_l) for the group prox); `a` is the transformed-l1 shape.
struct ProxStep {
  double beta = 0.0;
  double a = 1.0;
  ProxStep(double beta, double a);
};

/// Zero-region radius of the transformed-l1 prox: inputs with |w| <= t map
/// to exactly zero. Continuous in beta across the two branches.
double tl1_threshold(const ProxStep& step);

/// Closed-form proximal operator of beta * tl1 for a scalar weight: the
/// global minimizer of (1/(2 beta)) (v - w)^2 + (a+1)|v| / (a+|v|).
double tl1_prox_scalar(double w, const ProxStep& step);

Matrix tl1_prox_matrix(Matrix w, const ProxStep& step);

enum class GroupScheme { DenseRowGroups, ConvFilterGroups };

/// Disjoint index sets covering every entry of one layer's weight matrix.
/// Both schemes group by matrix row: the outgoing connections of each input
/// neuron for dense layers, all taps of one filter for conv layers.
struct GroupPartition {
  GroupScheme scheme = GroupScheme::DenseRowGroups;
  std::vector<std::vector<int>> groups;  // flat row-major indices

  static GroupPartition dense_row_groups(int rows, int cols);
  static GroupPartition conv_filter_groups(int filters, int taps_per_filter);
  static GroupPartition custom(GroupScheme scheme, std::vector<std::vector<int>> groups,
                               std::size_t entry_count);

  /// Disjointness, coverage and nonemptiness against a matrix of this size.
  void validate(std::size_t entry_count) const;
};

/// Per group g, scales entries by (1 - beta_group / ||w_g||_2)_+ ; groups at
/// or below the threshold norm become exactly zero.
Matrix group_prox(Matrix w, const GroupPartition& partition, double beta_group);

/// Elementwise soft threshold sgn(w) * max(0, |w| - beta).
Matrix l1_prox(Matrix w, double beta);

/// Transformed-l1 prox with beta = lambda*gamma*mu_l, then group prox with
/// beta = lambda*gamma*(1-mu_l), in that order.
Matrix integrated_prox(Matrix w, const GroupPartition& partition, double lambda, double gamma,
                       double mu_l, double a);

/// Serial twins of the matrix operators, kept as the reference the OpenMP
/// paths are checked against.
namespace reference {
Matrix tl1_prox_matrix(Matrix w, const ProxStep& step);
Matrix group_prox(Matrix w, const GroupPartition& partition, double beta_group);
Matrix l1_prox(Matrix w, double beta);
}  // namespace reference

}  // namespace sparseprox
