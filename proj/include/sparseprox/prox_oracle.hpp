#pragma once

#include <cstdint>

namespace sparseprox {

/// Brute-force global minimizer of (v - w)^2 / (2 beta) + (a+1)|v| / (a+|v|):
/// dense grid scan followed by golden-section refinement, with the origin
/// checked as an explicit candidate. Deliberately independent of the
/// closed-form prox so the two can be played against each other.
double tl1_prox_brute_force(double w, double beta, double a);

struct ProxCheckReport {
  int samples = 0;
  double max_deviation = 0.0;
  double worst_w = 0.0;
  double worst_beta = 0.0;
  double worst_a = 0.0;
};

/// Compares tl1_prox_scalar against the brute-force minimizer over `samples`
/// seeded random triples (w in [-5,5], beta in (0,2], a in {1e-2,...,1e2}).
ProxCheckReport run_prox_check(int samples, std::uint64_t seed);

}  // namespace sparseprox
