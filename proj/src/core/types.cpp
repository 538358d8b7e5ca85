#include "splatlm/core/types.hpp"

#include <cmath>
#include <stdexcept>

namespace splatlm {

GaussianSet GaussianSet::zeros(int count) {
    GaussianSet g;
    g.count = count;
    g.means.assign(3 * count, 0.0);
    g.log_scales.assign(3 * count, 0.0);
    g.rotations.assign(4 * count, 0.0);
    for (int i = 0; i < count; ++i) g.rotations[4 * i] = 1.0;  // identity quaternions
    g.opacity_logits.assign(count, 0.0);
    g.colors.assign(3 * count, 0.0);
    return g;
}

ParamVector GaussianSet::pack() const {
    ParamVector v(param_count());
    for (int g = 0; g < count; ++g) {
        double* b = v.data() + static_cast<size_t>(g) * kParamsPerGaussian;
        for (int i = 0; i < 3; ++i) b[kMeanOffset + i] = means[3 * g + i];
        for (int i = 0; i < 3; ++i) b[kLogScaleOffset + i] = log_scales[3 * g + i];
        for (int i = 0; i < 4; ++i) b[kRotationOffset + i] = rotations[4 * g + i];
        b[kOpacityOffset] = opacity_logits[g];
        for (int i = 0; i < 3; ++i) b[kColorOffset + i] = colors[3 * g + i];
    }
    return v;
}

GaussianSet GaussianSet::unpack(const ParamVector& v) {
    if (v.size() % kParamsPerGaussian != 0)
        throw std::invalid_argument("parameter vector length is not a multiple of 14");
    GaussianSet g = zeros(static_cast<int>(v.size() / kParamsPerGaussian));
    for (int i = 0; i < g.count; ++i) {
        const double* b = v.data() + static_cast<size_t>(i) * kParamsPerGaussian;
        for (int k = 0; k < 3; ++k) g.means[3 * i + k] = b[kMeanOffset + k];
        for (int k = 0; k < 3; ++k) g.log_scales[3 * i + k] = b[kLogScaleOffset + k];
        for (int k = 0; k < 4; ++k) g.rotations[4 * i + k] = b[kRotationOffset + k];
        g.opacity_logits[i] = b[kOpacityOffset];
        for (int k = 0; k < 3; ++k) g.colors[3 * i + k] = b[kColorOffset + k];
    }
    return g;
}

void GaussianSet::apply_update(const ParamVector& delta, double eta) {
    if (delta.size() != static_cast<size_t>(param_count()))
        throw std::invalid_argument("update length does not match parameter count");
    for (int g = 0; g < count; ++g) {
        const double* b = delta.data() + static_cast<size_t>(g) * kParamsPerGaussian;
        for (int i = 0; i < 3; ++i) means[3 * g + i] += eta * b[kMeanOffset + i];
        for (int i = 0; i < 3; ++i) log_scales[3 * g + i] += eta * b[kLogScaleOffset + i];
        for (int i = 0; i < 4; ++i) rotations[4 * g + i] += eta * b[kRotationOffset + i];
        opacity_logits[g] += eta * b[kOpacityOffset];
        for (int i = 0; i < 3; ++i) colors[3 * g + i] += eta * b[kColorOffset + i];
    }
    renormalize_rotations();
}

void GaussianSet::renormalize_rotations() {
    for (int g = 0; g < count; ++g) {
        double* q = rotations.data() + 4 * g;
        const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        if (n == 0.0) {
            q[0] = 1.0;
            q[1] = q[2] = q[3] = 0.0;
            continue;
        }
        for (int i = 0; i < 4; ++i) q[i] /= n;
    }
}

Vec3<double> Camera::position() const {
    // x_cam = R x_world + t  =>  center = -R^T t
    const auto& r = world_to_cam;
    return {-(r[0] * translation[0] + r[3] * translation[1] + r[6] * translation[2]),
            -(r[1] * translation[0] + r[4] * translation[1] + r[7] * translation[2]),
            -(r[2] * translation[0] + r[5] * translation[1] + r[8] * translation[2])};
}

Vec3<double> Camera::direction() const {
    // Third row of R is the camera z axis (forward) expressed in world space.
    return {world_to_cam[6], world_to_cam[7], world_to_cam[8]};
}

void Camera::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera size must be positive");
    if (fx <= 0 || fy <= 0) throw std::invalid_argument("camera focal must be positive");
    const auto& r = world_to_cam;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double d = 0;
            for (int k = 0; k < 3; ++k) d += r[3 * i + k] * r[3 * j + k];
            const double expect = (i == j) ? 1.0 : 0.0;
            if (std::abs(d - expect) > 1e-6)
                throw std::invalid_argument("camera rotation is not orthonormal");
        }
    }
}

}  // namespace splatlm
