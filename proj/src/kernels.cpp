#include "sparseprox/kernels.hpp"

#include <cstdint>
#include <stdexcept>

namespace sparseprox::kernels {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_conv(const ConvDims& d) {
  require(d.in_h > 0 && d.in_w > 0 && d.in_c > 0, "conv dims must be positive");
  require(d.kernel > 0 && d.filters > 0, "conv kernel and filter count must be positive");
  require(d.kernel <= d.in_h && d.kernel <= d.in_w, "conv kernel larger than input");
}

std::size_t conv_in_len(const ConvDims& d) {
  return static_cast<std::size_t>(d.in_h) * d.in_w * d.in_c;
}

std::size_t conv_out_len(const ConvDims& d) {
  return static_cast<std::size_t>(d.out_h()) * d.out_w() * d.filters;
}

std::size_t conv_tap_len(const ConvDims& d) {
  return static_cast<std::size_t>(d.kernel) * d.kernel * d.in_c;
}

double dense_forward_at(const Matrix& x, const Matrix& w, std::span<const double> bias,
                        std::size_t n, std::size_t j) {
  double acc = bias[j];
  for (std::size_t i = 0; i < w.rows(); ++i) acc += x(n, i) * w(i, j);
  return acc;
}

double dense_dx_at(const Matrix& dy, const Matrix& w, std::size_t n, std::size_t i) {
  double acc = 0.0;
  for (std::size_t j = 0; j < w.cols(); ++j) acc += dy(n, j) * w(i, j);
  return acc;
}

double dense_dw_at(const Matrix& x, const Matrix& dy, std::size_t i, std::size_t j) {
  double acc = 0.0;
  for (std::size_t n = 0; n < x.rows(); ++n) acc += x(n, i) * dy(n, j);
  return acc;
}

double dense_db_at(const Matrix& dy, std::size_t j) {
  double acc = 0.0;
  for (std::size_t n = 0; n < dy.rows(); ++n) acc += dy(n, j);
  return acc;
}

void conv_forward_row(const Matrix& x, const ConvDims& d, const Matrix& w,
                      std::span<const double> bias, Matrix& y, std::size_t n) {
  const int oh = d.out_h();
  const int ow = d.out_w();
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int f = 0; f < d.filters; ++f) {
        double acc = bias[static_cast<std::size_t>(f)];
        for (int ky = 0; ky < d.kernel; ++ky) {
          for (int kx = 0; kx < d.kernel; ++kx) {
            for (int c = 0; c < d.in_c; ++c) {
              const std::size_t xi =
                  (static_cast<std::size_t>(oy + ky) * d.in_w + (ox + kx)) * d.in_c + c;
              const std::size_t wi =
                  (static_cast<std::size_t>(ky) * d.kernel + kx) * d.in_c + c;
              acc += x(n, xi) * w(static_cast<std::size_t>(f), wi);
            }
          }
        }
        y(n, (static_cast<std::size_t>(oy) * ow + ox) * d.filters + f) = acc;
      }
    }
  }
}

void conv_dx_row(const Matrix& dy, const ConvDims& d, const Matrix& w, Matrix& dx,
                 std::size_t n) {
  const int oh = d.out_h();
  const int ow = d.out_w();
  for (int iy = 0; iy < d.in_h; ++iy) {
    for (int ix = 0; ix < d.in_w; ++ix) {
      for (int c = 0; c < d.in_c; ++c) {
        double acc = 0.0;
        for (int f = 0; f < d.filters; ++f) {
          for (int ky = 0; ky < d.kernel; ++ky) {
            const int oy = iy - ky;
            if (oy < 0 || oy >= oh) continue;
            for (int kx = 0; kx < d.kernel; ++kx) {
              const int ox = ix - kx;
              if (ox < 0 || ox >= ow) continue;
              const std::size_t wi =
                  (static_cast<std::size_t>(ky) * d.kernel + kx) * d.in_c + c;
              const std::size_t yi =
                  (static_cast<std::size_t>(oy) * ow + ox) * d.filters + f;
              acc += w(static_cast<std::size_t>(f), wi) * dy(n, yi);
            }
          }
        }
        dx(n, (static_cast<std::size_t>(iy) * d.in_w + ix) * d.in_c + c) = acc;
      }
    }
  }
}

void conv_dw_filter(const Matrix& x, const ConvDims& d, const Matrix& dy, Matrix& dw, int f) {
  const int oh = d.out_h();
  const int ow = d.out_w();
  for (int ky = 0; ky < d.kernel; ++ky) {
    for (int kx = 0; kx < d.kernel; ++kx) {
      for (int c = 0; c < d.in_c; ++c) {
        double acc = 0.0;
        for (std::size_t n = 0; n < x.rows(); ++n) {
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              const std::size_t xi =
                  (static_cast<std::size_t>(oy + ky) * d.in_w + (ox + kx)) * d.in_c + c;
              const std::size_t yi =
                  (static_cast<std::size_t>(oy) * ow + ox) * d.filters + f;
              acc += x(n, xi) * dy(n, yi);
            }
          }
        }
        dw(static_cast<std::size_t>(f),
           (static_cast<std::size_t>(ky) * d.kernel + kx) * d.in_c + c) = acc;
      }
    }
  }
}

double conv_db_at(const Matrix& dy, const ConvDims& d, int f) {
  const std::size_t positions = static_cast<std::size_t>(d.out_h()) * d.out_w();
  double acc = 0.0;
  for (std::size_t n = 0; n < dy.rows(); ++n) {
    for (std::size_t p = 0; p < positions; ++p) {
      acc += dy(n, p * d.filters + f);
    }
  }
  return acc;
}

void check_dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias) {
  require(x.cols() == w.rows(), "dense forward: input width does not match weight rows");
  require(bias.size() == w.cols(), "dense forward: bias length does not match weight cols");
}

void check_conv_forward(const Matrix& x, const ConvDims& d, const Matrix& w,
                        std::span<const double> bias) {
  check_conv(d);
  require(x.cols() == conv_in_len(d), "conv forward: input width does not match dims");
  require(w.rows() == static_cast<std::size_t>(d.filters) && w.cols() == conv_tap_len(d),
          "conv forward: weight shape does not match dims");
  require(bias.size() == static_cast<std::size_t>(d.filters),
          "conv forward: bias length does not match filter count");
}

}  // namespace

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y) {
  check_dense_forward(x, w, bias);
  y = Matrix(x.rows(), w.cols());
  const std::int64_t n_rows = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      y(static_cast<std::size_t>(n), j) =
          dense_forward_at(x, w, bias, static_cast<std::size_t>(n), j);
    }
  }
}

void dense_grad_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  require(dy.cols() == w.cols(), "dense grad input: delta width does not match weight cols");
  dx = Matrix(dy.rows(), w.rows());
  const std::int64_t n_rows = static_cast<std::int64_t>(dy.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    for (std::size_t i = 0; i < w.rows(); ++i) {
      dx(static_cast<std::size_t>(n), i) = dense_dx_at(dy, w, static_cast<std::size_t>(n), i);
    }
  }
}

void dense_grad_weights(const Matrix& x, const Matrix& dy, Matrix& dw) {
  require(x.rows() == dy.rows(), "dense grad weights: batch sizes differ");
  dw = Matrix(x.cols(), dy.cols());
  const std::int64_t in_dim = static_cast<std::int64_t>(x.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < in_dim; ++i) {
    for (std::size_t j = 0; j < dy.cols(); ++j) {
      dw(static_cast<std::size_t>(i), j) = dense_dw_at(x, dy, static_cast<std::size_t>(i), j);
    }
  }
}

void dense_grad_bias(const Matrix& dy, std::vector<double>& db) {
  db.assign(dy.cols(), 0.0);
  const std::int64_t out_dim = static_cast<std::int64_t>(dy.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < out_dim; ++j) {
    db[static_cast<std::size_t>(j)] = dense_db_at(dy, static_cast<std::size_t>(j));
  }
}

void conv2d_forward(const Matrix& x, const ConvDims& d, const Matrix& w,
                    std::span<const double> bias, Matrix& y) {
  check_conv_forward(x, d, w, bias);
  y = Matrix(x.rows(), conv_out_len(d));
  const std::int64_t n_rows = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    conv_forward_row(x, d, w, bias, y, static_cast<std::size_t>(n));
  }
}

void conv2d_grad_input(const Matrix& dy, const ConvDims& d, const Matrix& w, Matrix& dx) {
  check_conv(d);
  require(dy.cols() == conv_out_len(d), "conv grad input: delta width does not match dims");
  require(w.rows() == static_cast<std::size_t>(d.filters) && w.cols() == conv_tap_len(d),
          "conv grad input: weight shape does not match dims");
  dx = Matrix(dy.rows(), conv_in_len(d));
  const std::int64_t n_rows = static_cast<std::int64_t>(dy.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < n_rows; ++n) {
    conv_dx_row(dy, d, w, dx, static_cast<std::size_t>(n));
  }
}

void conv2d_grad_weights(const Matrix& x, const ConvDims& d, const Matrix& dy, Matrix& dw) {
  check_conv(d);
  require(x.rows() == dy.rows(), "conv grad weights: batch sizes differ");
  require(x.cols() == conv_in_len(d), "conv grad weights: input width does not match dims");
  require(dy.cols() == conv_out_len(d), "conv grad weights: delta width does not match dims");
  dw = Matrix(static_cast<std::size_t>(d.filters), conv_tap_len(d));
#pragma omp parallel for schedule(static)
  for (int f = 0; f < d.filters; ++f) {
    conv_dw_filter(x, d, dy, dw, f);
  }
}

void conv2d_grad_bias(const Matrix& dy, const ConvDims& d, std::vector<double>& db) {
  check_conv(d);
  require(dy.cols() == conv_out_len(d), "conv grad bias: delta width does not match dims");
  db.assign(static_cast<std::size_t>(d.filters), 0.0);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < d.filters; ++f) {
    db[static_cast<std::size_t>(f)] = conv_db_at(dy, d, f);
  }
}

namespace reference {

void dense_forward(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& y) {
  check_dense_forward(x, w, bias);
  y = Matrix(x.rows(), w.cols());
  for (std::size_t n = 0; n < x.rows(); ++n) {
    for (std::size_t j = 0; j < w.cols(); ++j) y(n, j) = dense_forward_at(x, w, bias, n, j);
  }
}

void dense_grad_input(const Matrix& dy, const Matrix& w, Matrix& dx) {
  require(dy.cols() == w.cols(), "dense grad input: delta width does not match weight cols");
  dx = Matrix(dy.rows(), w.rows());
  for (std::size_t n = 0; n < dy.rows(); ++n) {
    for (std::size_t i = 0; i < w.rows(); ++i) dx(n, i) = dense_dx_at(dy, w, n, i);
  }
}

void dense_grad_weights(const Matrix& x, const Matrix& dy, Matrix& dw) {
  require(x.rows() == dy.rows(), "dense grad weights: batch sizes differ");
  dw = Matrix(x.cols(), dy.cols());
  for (std::size_t i = 0; i < x.cols(); ++i) {
    for (std::size_t j = 0; j < dy.cols(); ++j) dw(i, j) = dense_dw_at(x, dy, i, j);
  }
}

void dense_grad_bias(const Matrix& dy, std::vector<double>& db) {
  db.assign(dy.cols(), 0.0);
  for (std::size_t j = 0; j < dy.cols(); ++j) db[j] = dense_db_at(dy, j);
}

void conv2d_forward(const Matrix& x, const ConvDims& d, const Matrix& w,
                    std::span<const double> bias, Matrix& y) {
  check_conv_forward(x, d, w, bias);
  y = Matrix(x.rows(), conv_out_len(d));
  for (std::size_t n = 0; n < x.rows(); ++n) conv_forward_row(x, d, w, bias, y, n);
}

void conv2d_grad_input(const Matrix& dy, const ConvDims& d, const Matrix& w, Matrix& dx) {
  check_conv(d);
  require(dy.cols() == conv_out_len(d), "conv grad input: delta width does not match dims");
  require(w.rows() == static_cast<std::size_t>(d.filters) && w.cols() == conv_tap_len(d),
          "conv grad input: weight shape does not match dims");
  dx = Matrix(dy.rows(), conv_in_len(d));
  for (std::size_t n = 0; n < dy.rows(); ++n) conv_dx_row(dy, d, w, dx, n);
}

void conv2d_grad_weights(const Matrix& x, const ConvDims& d, const Matrix& dy, Matrix& dw) {
  check_conv(d);
  require(x.rows() == dy.rows(), "conv grad weights: batch sizes differ");
  require(x.cols() == conv_in_len(d), "conv grad weights: input width does not match dims");
  require(dy.cols() == conv_out_len(d), "conv grad weights: delta width does not match dims");
  dw = Matrix(static_cast<std::size_t>(d.filters), conv_tap_len(d));
  for (int f = 0; f < d.filters; ++f) conv_dw_filter(x, d, dy, dw, f);
}

void conv2d_grad_bias(const Matrix& dy, const ConvDims& d, std::vector<double>& db) {
  check_conv(d);
  require(dy.cols() == conv_out_len(d), "conv grad bias: delta width does not match dims");
  db.assign(static_cast<std::size_t>(d.filters), 0.0);
  for (int f = 0; f < d.filters; ++f) db[static_cast<std::size_t>(f)] = conv_db_at(dy, d, f);
}

}  // namespace reference

}  // namespace sparseprox::kernels
