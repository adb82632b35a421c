#include "sparseprox/penalties.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace sparseprox {

std::string penalty_kind_name(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::L0: return "l0";
    case PenaltyKind::L1: return "l1";
    case PenaltyKind::L2: return "l2";
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Mcp: return "mcp";
    case PenaltyKind::LogPenalty: return "log";
    case PenaltyKind::CappedL1: return "capped-l1";
    case PenaltyKind::Lp: return "lp";
    case PenaltyKind::L1MinusL2: return "l1-l2";
    case PenaltyKind::Tl1: return "tl1";
  }
  return "?";
}

PenaltySpec PenaltySpec::scad(double lambda, double gamma) {
  return make(PenaltyKind::Scad, 1.0, lambda, gamma);
}
PenaltySpec PenaltySpec::mcp(double lambda, double gamma) {
  return make(PenaltyKind::Mcp, 1.0, lambda, gamma);
}
PenaltySpec PenaltySpec::log_penalty(double gamma) {
  return make(PenaltyKind::LogPenalty, 1.0, 1.0, gamma);
}
PenaltySpec PenaltySpec::capped_l1(double cap) { return make(PenaltyKind::CappedL1, cap); }
PenaltySpec PenaltySpec::lp(double p) { return make(PenaltyKind::Lp, 1.0, 1.0, 3.7, p); }
PenaltySpec PenaltySpec::tl1(double a) { return make(PenaltyKind::Tl1, a); }

PenaltySpec PenaltySpec::make(PenaltyKind kind, double a, double lambda_scad, double gamma,
                              double p) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  switch (kind) {
    case PenaltyKind::Tl1:
      require(std::isfinite(a) && a > 0.0, "tl1 requires a > 0");
      break;
    case PenaltyKind::CappedL1:
      require(std::isfinite(a) && a > 0.0, "capped-l1 requires cap a > 0");
      break;
    case PenaltyKind::Scad:
      require(std::isfinite(lambda_scad) && lambda_scad > 0.0, "scad requires lambda > 0");
      require(std::isfinite(gamma) && gamma > 2.0, "scad requires gamma > 2");
      break;
    case PenaltyKind::Mcp:
      require(std::isfinite(lambda_scad) && lambda_scad > 0.0, "mcp requires lambda > 0");
      require(std::isfinite(gamma) && gamma > 1.0, "mcp requires gamma > 1");
      break;
    case PenaltyKind::LogPenalty:
      require(std::isfinite(gamma) && gamma > 0.0, "log penalty requires gamma > 0");
      break;
    case PenaltyKind::Lp:
      require(std::isfinite(p) && p > 0.0 && p < 1.0, "lp requires p in (0, 1)");
      break;
    default:
      break;
  }
  return PenaltySpec{kind, a, lambda_scad, gamma, p};
}

double tl1_value(double x, double a) {
  const double ax = std::fabs(x);
  return (a + 1.0) * ax / (a + ax);
}

double penalty_value(const PenaltySpec& spec, double x) {
  if (!std::isfinite(x)) throw std::domain_error("penalty_value: x must be finite");
  const double ax = std::fabs(x);
  switch (spec.kind) {
    case PenaltyKind::L0:
      return x != 0.0 ? 1.0 : 0.0;
    case PenaltyKind::L1:
      return ax;
    case PenaltyKind::L2:
      return 0.5 * x * x;
    case PenaltyKind::Scad: {
      const double l = spec.lambda_scad, g = spec.gamma;
      if (ax <= l) return l * ax;
      if (ax < g * l) return (2.0 * g * l * ax - x * x - l * l) / (2.0 * (g - 1.0));
      return l * l * (g + 1.0) / 2.0;
    }
    case PenaltyKind::Mcp: {
      const double l = spec.lambda_scad, g = spec.gamma;
      if (ax <= g * l) return l * ax - x * x / (2.0 * g);
      return g * l * l / 2.0;
    }
    case PenaltyKind::LogPenalty:
      return std::log(spec.gamma * ax + 1.0) / std::log(spec.gamma + 1.0);
    case PenaltyKind::CappedL1:
      return std::min(ax, spec.a);
    case PenaltyKind::Lp:
      return std::pow(ax, spec.p);
    case PenaltyKind::L1MinusL2:
      return 0.0;  // ||x||_1 - ||x||_2 of a single entry
    case PenaltyKind::Tl1:
      return tl1_value(x, spec.a);
  }
  throw std::logic_error("penalty_value: unknown kind");
}

double penalty_value_vector(const PenaltySpec& spec, std::span<const double> x) {
  if (x.empty()) throw std::domain_error("penalty_value_vector: empty sequence");
  switch (spec.kind) {
    case PenaltyKind::L1MinusL2: {
      double l1 = 0.0, sq = 0.0;
      for (double xi : x) {
        if (!std::isfinite(xi)) throw std::domain_error("penalty_value_vector: non-finite entry");
        l1 += std::fabs(xi);
        sq += xi * xi;
      }
      return l1 - std::sqrt(sq);
    }
    case PenaltyKind::Lp: {
      double s = 0.0;
      for (double xi : x) {
        if (!std::isfinite(xi)) throw std::domain_error("penalty_value_vector: non-finite entry");
        s += std::pow(std::fabs(xi), spec.p);
      }
      return std::pow(s, 1.0 / spec.p);
    }
    default: {
      double s = 0.0;
      for (double xi : x) s += penalty_value(spec, xi);
      return s;
    }
  }
}

double grid_point(double half_width, int resolution, int i) {
  // (i - c) * (hw / c) keeps the lattice exactly antisymmetric in floating
  // point: point(res-1-i) == -point(i) bitwise, with an exact 0 at the center
  // of odd resolutions.
  const double c = 0.5 * (resolution - 1);
  return (i - c) * (half_width / c);
}

Matrix contour_grid(const PenaltySpec& spec, double half_width, int resolution) {
  if (!(half_width > 0.0)) throw std::invalid_argument("contour_grid: half_width must be > 0");
  if (resolution < 2) throw std::invalid_argument("contour_grid: resolution must be >= 2");
  Matrix grid(resolution, resolution);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < resolution; ++i) {
    const double x1 = grid_point(half_width, resolution, i);
    for (int j = 0; j < resolution; ++j) {
      const double x2 = grid_point(half_width, resolution, j);
      const double pt[2] = {x1, x2};
      grid(i, j) = penalty_value_vector(spec, pt);
    }
  }
  return grid;
}

void write_contour_csv(const PenaltySpec& spec, double half_width, int resolution,
                       std::ostream& out) {
  const Matrix grid = contour_grid(spec, half_width, resolution);
  out << "x1,x2,value\n";
  char buf[128];
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n",
                    grid_point(half_width, resolution, i),
                    grid_point(half_width, resolution, j), grid(i, j));
      out << buf;
    }
  }
}

}  // namespace sparseprox
