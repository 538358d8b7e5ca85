#pragma once

#include <cmath>
#include <stdexcept>

#include "splatlm/core/types.hpp"
#include "splatlm/core/vecmath.hpp"

namespace splatlm {

// Isotropic screen-space covariance dilation (anti-aliasing low pass).
inline constexpr double kCovDilation = 0.3;

// Culling radius in standard deviations (99% confidence ellipse).
inline constexpr double kScreenCullSigma = 3.0;

// Rotation matrix of q / |q|. The normalization is part of the function so
// that derivatives taken with respect to the raw stored quaternion flow
// through it.
template <class T>
Mat3<T> quat_to_rotation(const Vec4<T>& q) {
    const T norm_sq = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
    if (scalar_value(norm_sq) == 0.0) throw std::domain_error("zero-norm quaternion");
    using std::sqrt;
    const T inv_norm = 1.0 / sqrt(norm_sq);
    const T w = q.w * inv_norm, x = q.x * inv_norm, y = q.y * inv_norm, z = q.z * inv_norm;

    Mat3<T> r;
    r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
    r(0, 1) = 2.0 * (x * y - w * z);
    r(0, 2) = 2.0 * (x * z + w * y);
    r(1, 0) = 2.0 * (x * y + w * z);
    r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
    r(1, 2) = 2.0 * (y * z - w * x);
    r(2, 0) = 2.0 * (x * z - w * y);
    r(2, 1) = 2.0 * (y * z + w * x);
    r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
    return r;
}

// Sigma = R S S^T R^T with S = diag(exp(log_scale)).
template <class T>
Mat3<T> covariance_3d(const Vec3<T>& log_scale, const Vec4<T>& q) {
    using std::exp;
    const Mat3<T> r = quat_to_rotation(q);
    const T s[3] = {exp(log_scale.x), exp(log_scale.y), exp(log_scale.z)};

    Mat3<T> m;  // R * S
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = r(i, j) * s[j];

    Mat3<T> sigma;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            sigma(i, j) = m(i, 0) * m(j, 0) + m(i, 1) * m(j, 1) + m(i, 2) * m(j, 2);
    return sigma;
}

template <class T>
struct ProjectedGaussian {
    Vec2<T> mean2d;   // pixel coordinates
    Sym2<T> cov2d;    // screen-space covariance including dilation
    T depth{};        // camera-space z
    bool culled = true;
};

// EWA-style perspective projection of a world-space Gaussian. Culling
// (near plane, 99% ellipse off screen) is decided on the value part so the
// dual instantiation replays exactly the plain-double decisions.
template <class T>
ProjectedGaussian<T> project_gaussian(const Vec3<T>& mean, const Mat3<T>& sigma,
                                      const Camera& cam) {
    ProjectedGaussian<T> out;

    const auto& r = cam.world_to_cam;
    const Vec3<T> t{r[0] * mean.x + r[1] * mean.y + r[2] * mean.z + cam.translation[0],
                    r[3] * mean.x + r[4] * mean.y + r[5] * mean.z + cam.translation[1],
                    r[6] * mean.x + r[7] * mean.y + r[8] * mean.z + cam.translation[2]};
    out.depth = t.z;
    if (scalar_value(t.z) <= cam.near_clip) return out;

    const T iz = 1.0 / t.z;
    out.mean2d = {cam.fx * t.x * iz + cam.cx, cam.fy * t.y * iz + cam.cy};

    // Rows of J_proj * R_cam; J_proj is the pinhole Jacobian at t.
    const T iz2 = iz * iz;
    const T j00 = cam.fx * iz, j02 = -cam.fx * t.x * iz2;
    const T j11 = cam.fy * iz, j12 = -cam.fy * t.y * iz2;
    const Vec3<T> row0{j00 * r[0] + j02 * r[6], j00 * r[1] + j02 * r[7], j00 * r[2] + j02 * r[8]};
    const Vec3<T> row1{j11 * r[3] + j12 * r[6], j11 * r[4] + j12 * r[7], j11 * r[5] + j12 * r[8]};

    const Vec3<T> s0 = matvec(sigma, row0);
    const Vec3<T> s1 = matvec(sigma, row1);
    out.cov2d.a = dot(row0, s0) + kCovDilation;
    out.cov2d.b = dot(row0, s1);
    out.cov2d.c = dot(row1, s1) + kCovDilation;

    const Sym2<double> cov{scalar_value(out.cov2d.a), scalar_value(out.cov2d.b),
                           scalar_value(out.cov2d.c)};
    const double radius = kScreenCullSigma * std::sqrt(sym2_max_eigenvalue(cov));
    const double mx = scalar_value(out.mean2d.x), my = scalar_value(out.mean2d.y);
    if (mx + radius < 0.0 || mx - radius > cam.width || my + radius < 0.0 ||
        my - radius > cam.height)
        return out;

    out.culled = false;
    return out;
}

}  // namespace splatlm
