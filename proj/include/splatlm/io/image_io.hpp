#pragma once

#include <filesystem>
#include <vector>

#include "splatlm/core/types.hpp"

namespace splatlm::io {

// float32 storage buffer for dataset images; widened to the double-precision
// Image for all loss/metric math.
struct ImageF {
    int width = 0, height = 0;
    std::vector<float> data;  // height * width * 3

    float at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
};

Image widen(const ImageF& img);
ImageF narrow(const Image& img);

// 8-bit RGB PNG; values clamped to [0,1].
void write_png8(const std::filesystem::path& path, const Image& img);
// 16-bit RGB PNG (lossless enough for float round-trips in tests/datagen).
void write_png16(const std::filesystem::path& path, const Image& img);

// Reads 8- or 16-bit gray/RGB/RGBA PNGs; alpha is composited over black.
// Throws std::runtime_error with the path on failure.
ImageF read_png(const std::filesystem::path& path);

}  // namespace splatlm::io
