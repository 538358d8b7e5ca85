#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "splatlm/core/vecmath.hpp"

namespace splatlm {

// Flat parameter layout: one contiguous 14-entry block per Gaussian,
// [mean(3), log_scale(3), rotation(4), opacity_logit(1), color(3)].
// This layout defines the index space of updates, gradients and the
// Gauss-Newton diagonal.
inline constexpr int kMeanOffset = 0;
inline constexpr int kLogScaleOffset = 3;
inline constexpr int kRotationOffset = 6;
inline constexpr int kOpacityOffset = 10;
inline constexpr int kColorOffset = 11;
inline constexpr int kParamsPerGaussian = 14;

// Level-0 spherical harmonic basis constant; rendered channel is
// max(0, 0.5 + kColorC0 * coeff).
inline constexpr double kColorC0 = 0.28209479177387814;

using ParamVector = std::vector<double>;

// Scene parameters stored raw (pre-activation): scale = exp(log_scale),
// opacity = sigmoid(logit). Rotations are kept unit length by re-normalizing
// after every optimizer update, not on read.
struct GaussianSet {
    int count = 0;
    std::vector<double> means;           // 3 * count
    std::vector<double> log_scales;      // 3 * count
    std::vector<double> rotations;       // 4 * count, (w, x, y, z)
    std::vector<double> opacity_logits;  // count
    std::vector<double> colors;          // 3 * count, level-0 SH coefficients

    static GaussianSet zeros(int count);

    int param_count() const { return kParamsPerGaussian * count; }

    Vec3<double> mean(int g) const { return {means[3 * g], means[3 * g + 1], means[3 * g + 2]}; }
    Vec3<double> log_scale(int g) const {
        return {log_scales[3 * g], log_scales[3 * g + 1], log_scales[3 * g + 2]};
    }
    Vec4<double> rotation(int g) const {
        return {rotations[4 * g], rotations[4 * g + 1], rotations[4 * g + 2], rotations[4 * g + 3]};
    }

    ParamVector pack() const;
    static GaussianSet unpack(const ParamVector& v);

    // beta += eta * delta, then rotation re-normalization.
    void apply_update(const ParamVector& delta, double eta);
    void renormalize_rotations();
};

// Pinhole camera; world_to_cam maps world points into a frame with x right,
// y down, z forward (depth).
struct Camera {
    std::array<double, 9> world_to_cam{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major rotation
    std::array<double, 3> translation{0, 0, 0};
    double fx = 0, fy = 0;
    double cx = 0, cy = 0;
    int width = 0, height = 0;
    double near_clip = 0.2;

    Vec3<double> position() const;   // camera center in world space
    Vec3<double> direction() const;  // unit viewing direction in world space

    // Throws std::invalid_argument when sizes/focals are non-positive or the
    // rotation is not orthonormal within 1e-6.
    void validate() const;
};

// Interleaved RGB image, double precision. Datasets store float32 buffers
// (io module); all rendering/loss math runs on this type.
struct Image {
    int width = 0, height = 0;
    std::vector<double> data;  // height * width * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

}  // namespace splatlm
