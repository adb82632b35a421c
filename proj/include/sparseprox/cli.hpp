#pragma once

namespace sparseprox {

/// Full command-line surface (train / prox-check / contours / report),
/// callable in-process. Returns the process exit code: 0 success, 1
/// verification failure, 2 usage or config error, 3 training divergence.
int run_cli(int argc, const char* const* argv);

}  // namespace sparseprox
