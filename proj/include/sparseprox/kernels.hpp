#pragma once

#include <span>
#include <vector>

#include "sparseprox/matrix.hpp"

namespace sparseprox::kernels {

/// Geometry of one valid (stride 1, no padding) cross-correlation.
/// Activations are flattened row-major as ((y * width + x) * channels + c);
/// filter rows are flattened as ((ky * kernel + kx) * in_c + c).
struct ConvDims {
  int in_h = 0;
  int in_w = 0;
  int in_c = 0;
  int kernel = 0;
  int filters = 0;
  int out_h() const { return in_h - kernel + 1; }
  int out_w() const { return in_w - kernel + 1; }
};

// OpenMP kernels. Every parallel loop assigns whole output elements to one
// thread and keeps each accumulation in a fixed serial order, so results are
// bitwise identical to the serial reference at any thread count.

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y);
void dense_grad_input(const Matrix& dy, const Matrix& w, Matrix& dx);
void dense_grad_weights(const Matrix& x, const Matrix& dy, Matrix& dw);
void dense_grad_bias(const Matrix& dy, std::vector<double>& db);

void conv2d_forward(const Matrix& x, const ConvDims& d, const Matrix& w,
                    std::span<const double> bias, Matrix& y);
void conv2d_grad_input(const Matrix& dy, const ConvDims& d, const Matrix& w, Matrix& dx);
void conv2d_grad_weights(const Matrix& x, const ConvDims& d, const Matrix& dy, Matrix& dw);
void conv2d_grad_bias(const Matrix& dy, const ConvDims& d, std::vector<double>& db);

/// Serial reference implementations, kept for parity tests and benchmarks.
namespace reference {
void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y);
void dense_grad_input(const Matrix& dy, const Matrix& w, Matrix& dx);
void dense_grad_weights(const Matrix& x, const Matrix& dy, Matrix& dw);
void dense_grad_bias(const Matrix& dy, std::vector<double>& db);

void conv2d_forward(const Matrix& x, const ConvDims& d, const Matrix& w,
                    std::span<const double> bias, Matrix& y);
void conv2d_grad_input(const Matrix& dy, const ConvDims& d, const Matrix& w, Matrix& dx);
void conv2d_grad_weights(const Matrix& x, const ConvDims& d, const Matrix& dy, Matrix& dw);
void conv2d_grad_bias(const Matrix& dy, const ConvDims& d, std::vector<double>& db);
}  // namespace reference

}  // namespace sparseprox::kernels
