#include "sparseprox/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sparseprox {

namespace {

constexpr double kAcosClampTol = 1e-9;

double group_scale(const Matrix& w, const std::vector<int>& group, double beta_group) {
  double sq = 0.0;
  for (int idx : group) sq += w[idx] * w[idx];
  const double norm = std::sqrt(sq);
  if (norm == 0.0) return 0.0;  // all-zero group stays zero, no division
  return std::max(0.0, 1.0 - beta_group / norm);
}

void apply_group(Matrix& w, const std::vector<int>& group, double beta_group) {
  const double scale = group_scale(w, group, beta_group);
  if (scale == 0.0) {
    for (int idx : group) w[idx] = 0.0;
  } else {
    for (int idx : group) w[idx] *= scale;
  }
}

double soft_threshold(double w, double beta) {
  const double m = std::fabs(w) - beta;
  if (m <= 0.0) return 0.0;
  return w > 0.0 ? m : -m;
}

}  // namespace

ProxStep::ProxStep(double beta_, double a_) : beta(beta_), a(a_) {
  if (!(std::isfinite(beta) && beta >= 0.0))
    throw std::invalid_argument("ProxStep: beta must be finite and >= 0");
  if (!(std::isfinite(a) && a > 0.0))
    throw std::invalid_argument("ProxStep: a must be finite and > 0");
}

double tl1_threshold(const ProxStep& step) {
  const double beta = step.beta, a = step.a;
  if (beta == 0.0) return 0.0;
  if (beta <= a * a / (2.0 * (a + 1.0))) return beta * (a + 1.0) / a;
  return std::sqrt(2.0 * beta * (a + 1.0)) - a / 2.0;
}

double tl1_prox_scalar(double w, const ProxStep& step) {
  if (!std::isfinite(w)) throw std::domain_error("tl1_prox_scalar: w must be finite");
  if (step.beta == 0.0) return w;
  const double aw = std::fabs(w);
  if (aw <= tl1_threshold(step)) return 0.0;

  const double a = step.a;
  const double shifted = a + aw;
  double arg = 1.0 - 27.0 * step.beta * a * (a + 1.0) / (2.0 * shifted * shifted * shifted);
  if (arg < -1.0 || arg > 1.0) {
    if (std::fabs(arg) > 1.0 + kAcosClampTol)
      throw std::runtime_error("tl1_prox_scalar: arccos argument " + std::to_string(arg) +
                               " outside [-1, 1]");
    arg = std::clamp(arg, -1.0, 1.0);
  }
  const double phi = std::acos(arg);
  const double g = 2.0 / 3.0 * shifted * std::cos(phi / 3.0) - 2.0 * a / 3.0 + aw / 3.0;
  // g is analytically nonnegative above the threshold; rounding at the
  // boundary must not flip the sign.
  const double mag = std::max(0.0, g);
  return w > 0.0 ? mag : -mag;
}

GroupPartition GroupPartition::dense_row_groups(int rows, int cols) {
  if (rows <= 0 || cols <= 0)
    throw std::invalid_argument("dense_row_groups: rows and cols must be positive");
  GroupPartition p;
  p.scheme = GroupScheme::DenseRowGroups;
  p.groups.resize(rows);
  for (int r = 0; r < rows; ++r) {
    p.groups[r].resize(cols);
    std::iota(p.groups[r].begin(), p.groups[r].end(), r * cols);
  }
  return p;
}

GroupPartition GroupPartition::conv_filter_groups(int filters, int taps_per_filter) {
  GroupPartition p = dense_row_groups(filters, taps_per_filter);
  p.scheme = GroupScheme::ConvFilterGroups;
  return p;
}

GroupPartition GroupPartition::custom(GroupScheme scheme, std::vector<std::vector<int>> groups,
                                      std::size_t entry_count) {
  GroupPartition p;
  p.scheme = scheme;
  p.groups = std::move(groups);
  p.validate(entry_count);
  return p;
}

void GroupPartition::validate(std::size_t entry_count) const {
  std::vector<char> seen(entry_count, 0);
  std::size_t covered = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("GroupPartition: empty group");
    for (int idx : g) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= entry_count)
        throw std::invalid_argument("GroupPartition: index out of range");
      if (seen[idx]) throw std::invalid_argument("GroupPartition: overlapping groups");
      seen[idx] = 1;
      ++covered;
    }
  }
  if (covered != entry_count)
    throw std::invalid_argument("GroupPartition: groups do not cover every entry");
}

Matrix tl1_prox_matrix(Matrix w, const ProxStep& step) {
  if (step.beta == 0.0) return w;
  const int rows = w.rows(), cols = w.cols();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (!std::isfinite(w(r, c)))
        throw std::domain_error("tl1_prox_matrix: non-finite weight at (" + std::to_string(r) +
                                ", " + std::to_string(c) + ")");
  // Exceptions must not escape the parallel region; latch the first failure
  // and rethrow afterwards.
  bool failed = false;
  std::string fail_msg;
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      try {
        w(r, c) = tl1_prox_scalar(w(r, c), step);
      } catch (const std::exception& e) {
#pragma omp critical(sparseprox_tl1_prox_fail)
        {
          if (!failed) {
            failed = true;
            fail_msg = "tl1_prox_matrix at (" + std::to_string(r) + ", " + std::to_string(c) +
                       "): " + e.what();
          }
        }
      }
    }
  }
  if (failed) throw std::runtime_error(fail_msg);
  return w;
}

Matrix group_prox(Matrix w, const GroupPartition& partition, double beta_group) {
  if (!(std::isfinite(beta_group) && beta_group >= 0.0))
    throw std::invalid_argument("group_prox: beta_group must be finite and >= 0");
  partition.validate(w.size());
  if (beta_group == 0.0) return w;
  const int n = static_cast<int>(partition.groups.size());
#pragma omp parallel for schedule(static)
  for (int g = 0; g < n; ++g) apply_group(w, partition.groups[g], beta_group);
  return w;
}

Matrix l1_prox(Matrix w, double beta) {
  if (!(std::isfinite(beta) && beta >= 0.0))
    throw std::invalid_argument("l1_prox: beta must be finite and >= 0");
  if (beta == 0.0) return w;
  const int rows = w.rows(), cols = w.cols();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) w(r, c) = soft_threshold(w(r, c), beta);
  return w;
}

Matrix integrated_prox(Matrix w, const GroupPartition& partition, double lambda, double gamma,
                       double mu_l, double a) {
  if (!(mu_l >= 0.0 && mu_l <= 1.0))
    throw std::invalid_argument("integrated_prox: mu_l must be in [0, 1]");
  if (!(lambda >= 0.0) || !(gamma >= 0.0))
    throw std::invalid_argument("integrated_prox: lambda and gamma must be >= 0");
  w = tl1_prox_matrix(std::move(w), ProxStep(lambda * gamma * mu_l, a));
  return group_prox(std::move(w), partition, lambda * gamma * (1.0 - mu_l));
}

namespace reference {

Matrix tl1_prox_matrix(Matrix w, const ProxStep& step) {
  if (step.beta == 0.0) return w;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = tl1_prox_scalar(w[i], step);
  return w;
}

Matrix group_prox(Matrix w, const GroupPartition& partition, double beta_group) {
  partition.validate(w.size());
  if (beta_group == 0.0) return w;
  for (const auto& g : partition.groups) apply_group(w, g, beta_group);
  return w;
}

Matrix l1_prox(Matrix w, double beta) {
  if (beta == 0.0) return w;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = soft_threshold(w[i], beta);
  return w;
}

}  // namespace reference

}  // namespace sparseprox
