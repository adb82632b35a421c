// Times the OpenMP kernels against the serial reference implementations and
// verifies that both produce bitwise identical results while at it.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "sparseprox/kernels.hpp"
#include "sparseprox/matrix.hpp"
#include "sparseprox/prox.hpp"

using namespace sparseprox;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = normal(rng);
  return m;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm caches
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const std::chrono::duration<double, std::milli> elapsed =
      std::chrono::steady_clock::now() - start;
  return elapsed.count() / reps;
}

void row(const char* name, double serial_ms, double omp_ms, bool identical) {
  std::printf("%-22s %10.3f ms %10.3f ms %8.2fx   %s\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms, identical ? "bitwise equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::mt19937_64 rng(42);

  const int batch = 256, in = 512, out = 512;
  const Matrix x = random_matrix(batch, in, rng);
  const Matrix w = random_matrix(in, out, rng);
  const std::vector<double> bias(out, 0.1);
  const Matrix dy = random_matrix(batch, out, rng);

  const kernels::ConvDims dims{16, 16, 8, 3, 16};
  const int conv_batch = 32;
  const Matrix cx = random_matrix(conv_batch, dims.in_h * dims.in_w * dims.in_c, rng);
  const Matrix cw = random_matrix(dims.filters, dims.kernel * dims.kernel * dims.in_c, rng);
  const std::vector<double> cbias(dims.filters, 0.05);
  const Matrix cdy =
      random_matrix(conv_batch, dims.out_h() * dims.out_w() * dims.filters, rng);

  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  {
    Matrix ys, yp;
    const double ts = time_ms([&] { kernels::reference::dense_forward(x, w, bias, ys); }, 5);
    const double tp = time_ms([&] { kernels::dense_forward(x, w, bias, yp); }, 5);
    row("dense forward", ts, tp, ys == yp);
  }
  {
    Matrix dxs, dxp;
    const double ts = time_ms([&] { kernels::reference::dense_grad_input(dy, w, dxs); }, 5);
    const double tp = time_ms([&] { kernels::dense_grad_input(dy, w, dxp); }, 5);
    row("dense grad input", ts, tp, dxs == dxp);
  }
  {
    Matrix dws, dwp;
    const double ts = time_ms([&] { kernels::reference::dense_grad_weights(x, dy, dws); }, 5);
    const double tp = time_ms([&] { kernels::dense_grad_weights(x, dy, dwp); }, 5);
    row("dense grad weights", ts, tp, dws == dwp);
  }
  {
    std::vector<double> dbs, dbp;
    const double ts = time_ms([&] { kernels::reference::dense_grad_bias(dy, dbs); }, 20);
    const double tp = time_ms([&] { kernels::dense_grad_bias(dy, dbp); }, 20);
    row("dense grad bias", ts, tp, dbs == dbp);
  }
  {
    Matrix ys, yp;
    const double ts =
        time_ms([&] { kernels::reference::conv2d_forward(cx, dims, cw, cbias, ys); }, 5);
    const double tp = time_ms([&] { kernels::conv2d_forward(cx, dims, cw, cbias, yp); }, 5);
    row("conv2d forward", ts, tp, ys == yp);
  }
  {
    Matrix dxs, dxp;
    const double ts =
        time_ms([&] { kernels::reference::conv2d_grad_input(cdy, dims, cw, dxs); }, 5);
    const double tp = time_ms([&] { kernels::conv2d_grad_input(cdy, dims, cw, dxp); }, 5);
    row("conv2d grad input", ts, tp, dxs == dxp);
  }
  {
    Matrix dws, dwp;
    const double ts =
        time_ms([&] { kernels::reference::conv2d_grad_weights(cx, dims, cdy, dws); }, 5);
    const double tp = time_ms([&] { kernels::conv2d_grad_weights(cx, dims, cdy, dwp); }, 5);
    row("conv2d grad weights", ts, tp, dws == dwp);
  }
  {
    std::vector<double> dbs, dbp;
    const double ts =
        time_ms([&] { kernels::reference::conv2d_grad_bias(cdy, dims, dbs); }, 20);
    const double tp = time_ms([&] { kernels::conv2d_grad_bias(cdy, dims, dbp); }, 20);
    row("conv2d grad bias", ts, tp, dbs == dbp);
  }
  {
    const ProxStep step{0.05, 1.0};
    Matrix rs, rp;
    const double ts = time_ms([&] { rs = reference::tl1_prox_matrix(w, step); }, 20);
    const double tp = time_ms([&] { rp = tl1_prox_matrix(w, step); }, 20);
    row("tl1 prox", ts, tp, rs == rp);
  }
  {
    const GroupPartition partition = GroupPartition::dense_row_groups(in, out);
    Matrix rs, rp;
    const double ts = time_ms([&] { rs = reference::group_prox(w, partition, 0.05); }, 20);
    const double tp = time_ms([&] { rp = group_prox(w, partition, 0.05); }, 20);
    row("group prox", ts, tp, rs == rp);
  }
  return 0;
}
