#pragma once

#include <span>
#include <string>
#include <vector>

#include "sparseprox/matrix.hpp"

namespace sparseprox {

enum class PenaltyKind { L0, L1, L2, Scad, Mcp, LogPenalty, CappedL1, Lp, L1MinusL2, Tl1 };

std::string penalty_kind_name(PenaltyKind kind);

/// A penalty family plus its shape parameters. Parameters that the chosen
/// kind does not use are ignored; the ones it does use are range-checked at
/// construction.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::L1;
  double a = 1.0;            // Tl1 shape, or the CappedL1 cap
  double lambda_scad = 1.0;  // internal lambda of Scad and Mcp (not the model's lambda)
  double gamma = 3.7;        // Scad / Mcp / LogPenalty shape
  double p = 0.5;            // Lp exponent, in (0, 1)

  static PenaltySpec l0() { return make(PenaltyKind::L0); }
  static PenaltySpec l1() { return make(PenaltyKind::L1); }
  static PenaltySpec l2() { return make(PenaltyKind::L2); }
  static PenaltySpec scad(double lambda, double gamma);
  static PenaltySpec mcp(double lambda, double gamma);
  static PenaltySpec log_penalty(double gamma);
  static PenaltySpec capped_l1(double cap);
  static PenaltySpec lp(double p);
  static PenaltySpec l1_minus_l2() { return make(PenaltyKind::L1MinusL2); }
  static PenaltySpec tl1(double a);

  /// Validates the parameters relevant to `kind`; throws std::invalid_argument.
  static PenaltySpec make(PenaltyKind kind, double a = 1.0, double lambda_scad = 1.0,
                          double gamma = 3.7, double p = 0.5);
};

/// Scalar transformed-l1 value (a+1)|x| / (a+|x|).
double tl1_value(double x, double a);

double penalty_value(const PenaltySpec& spec, double x);

/// Separable kinds sum the scalar values; L1MinusL2 is ||x||_1 - ||x||_2 and
/// Lp is (sum |x_i|^p)^(1/p).
double penalty_value_vector(const PenaltySpec& spec, std::span<const double> x);

/// The i-th of `resolution` evenly spaced points spanning [-half_width, half_width],
/// symmetric around zero by construction.
double grid_point(double half_width, int resolution, int i);

/// resolution x resolution grid of penalty_value_vector({x1, x2}) over the
/// square [-half_width, half_width]^2; entry (i, j) is (x1_i, x2_j).
Matrix contour_grid(const PenaltySpec& spec, double half_width, int resolution);

/// CSV with header x1,x2,value, rows in row-major order (x2 varies fastest),
/// reals at 9 significant digits.
void write_contour_csv(const PenaltySpec& spec, double half_width, int resolution,
                       std::ostream& out);

}  // namespace sparseprox
