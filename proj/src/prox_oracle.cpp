#include "sparseprox/prox_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sparseprox/penalties.hpp"
#include "sparseprox/prox.hpp"

namespace sparseprox {

namespace {

double objective(double v, double w, double beta, double a) {
  const double d = v - w;
  return d * d / (2.0 * beta) + tl1_value(v, a);
}

double golden_section(double lo, double hi, double w, double beta, double a) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1, w, beta, a);
  double f2 = objective(x2, w, beta, a);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1, w, beta, a);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2, w, beta, a);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double tl1_prox_brute_force(double w, double beta, double a) {
  if (!(beta > 0.0)) throw std::invalid_argument("tl1_prox_brute_force: beta must be > 0");
  if (!(a > 0.0)) throw std::invalid_argument("tl1_prox_brute_force: a must be > 0");
  const double radius = std::fabs(w) + 1.0;
  constexpr int cells = 4000;
  const double step = 2.0 * radius / cells;

  int best = 0;
  double best_val = objective(-radius, w, beta, a);
  for (int i = 1; i <= cells; ++i) {
    const double v = -radius + i * step;
    const double f = objective(v, w, beta, a);
    if (f < best_val) {
      best_val = f;
      best = i;
    }
  }
  const double lo = -radius + std::max(0, best - 1) * step;
  const double hi = -radius + std::min(cells, best + 1) * step;
  const double refined = golden_section(lo, hi, w, beta, a);

  // The objective can have a second local minimum at the kink; always try 0.
  if (objective(0.0, w, beta, a) <= objective(refined, w, beta, a)) return 0.0;
  return refined;
}

ProxCheckReport run_prox_check(int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("run_prox_check: samples must be >= 1");
  static constexpr double kShapes[] = {1e-2, 1e-1, 1.0, 10.0, 1e2};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w_dist(-5.0, 5.0);
  std::uniform_real_distribution<double> u_dist(0.0, 2.0);
  std::uniform_int_distribution<int> a_dist(0, 4);

  ProxCheckReport report;
  report.samples = samples;
  for (int i = 0; i < samples; ++i) {
    const double w = w_dist(rng);
    const double beta = 2.0 - u_dist(rng);  // (0, 2]
    const double a = kShapes[a_dist(rng)];
    const double closed = tl1_prox_scalar(w, ProxStep(beta, a));
    const double brute = tl1_prox_brute_force(w, beta, a);
    const double dev = std::fabs(closed - brute);
    if (dev > report.max_deviation) {
      report.max_deviation = dev;
      report.worst_w = w;
      report.worst_beta = beta;
      report.worst_a = a;
    }
  }
  return report;
}

}  // namespace sparseprox
