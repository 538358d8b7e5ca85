#pragma once

#include <filesystem>

#include "splatlm/core/types.hpp"

namespace splatlm::io {

// Flat binary container: 8-byte magic, u32 version, u64 Gaussian count, then
// the 14G parameter array as little-endian doubles in the flat layout. A
// human-readable sidecar <path>.meta.txt describes the contents. Round-trips
// are bit exact.
void save_checkpoint(const std::filesystem::path& path, const GaussianSet& gaussians);
GaussianSet load_checkpoint(const std::filesystem::path& path);

}  // namespace splatlm::io
