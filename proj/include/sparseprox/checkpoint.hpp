#pragma once

#include <string>

#include "sparseprox/network.hpp"

namespace sparseprox {

/// Model snapshot as JSON: input shape, layer specs, row-major weight rows and
/// bias vectors at full double precision. Rewriting the same model produces
/// byte-identical files.
void save_checkpoint(const std::string& path, const NetworkModel& model);

/// Rebuilds a model from a checkpoint, revalidating the layer stack and every
/// array dimension. Throws std::runtime_error naming the path on malformed
/// input.
NetworkModel load_checkpoint(const std::string& path);

}  // namespace sparseprox
