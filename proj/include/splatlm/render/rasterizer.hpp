#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "splatlm/autodiff/dual.hpp"
#include "splatlm/core/geometry.hpp"
#include "splatlm/core/types.hpp"

namespace splatlm::render {

inline constexpr int kTileSize = 16;
inline constexpr double kAlphaClamp = 0.99;
inline constexpr double kAlphaSkip = 1.0 / 255.0;
inline constexpr double kTransmittanceFloor = 1e-4;

// Raw (pre-activation) parameters of one Gaussian; T is double or Dual.
template <class T>
struct GaussianParams {
    Vec3<T> mean;
    Vec3<T> log_scale;
    Vec4<T> rotation;
    T opacity_logit{};
    T color[3]{};
};

inline GaussianParams<double> params_of(const GaussianSet& set, int g) {
    GaussianParams<double> p;
    p.mean = set.mean(g);
    p.log_scale = set.log_scale(g);
    p.rotation = set.rotation(g);
    p.opacity_logit = set.opacity_logits[g];
    for (int c = 0; c < 3; ++c) p.color[c] = set.colors[3 * g + c];
    return p;
}

// Screen-space state of one Gaussian for one camera. `radius` bounds the
// pixel reach: outside it, alpha is guaranteed below the 1/255 skip
// threshold, which is what makes tile-based and full-list rendering agree
// bitwise. `valid == false` means the splat contributes nowhere.
template <class T>
struct PreparedSplat {
    Vec2<T> mean2d;
    T conic_a{}, conic_b{}, conic_c{};  // inverse of the dilated 2D covariance
    T opacity{};                        // sigmoid(logit)
    T color[3]{};                       // max(0, 0.5 + C0 * coeff)
    Sym2<double> cov2d;                 // value part, kept for radius/tests
    double depth = 0.0;
    double radius = 0.0;
    bool valid = false;
};

using SplatD = PreparedSplat<double>;

template <class T>
PreparedSplat<T> prepare_splat(const GaussianParams<T>& p, const Camera& cam) {
    using std::exp;
    PreparedSplat<T> out;

    const Mat3<T> sigma = covariance_3d(p.log_scale, p.rotation);
    const ProjectedGaussian<T> proj = project_gaussian(p.mean, sigma, cam);
    out.depth = scalar_value(proj.depth);
    if (proj.culled) return out;

    out.mean2d = proj.mean2d;
    out.cov2d = {scalar_value(proj.cov2d.a), scalar_value(proj.cov2d.b),
                 scalar_value(proj.cov2d.c)};

    const T det = proj.cov2d.a * proj.cov2d.c - proj.cov2d.b * proj.cov2d.b;
    if (!(scalar_value(det) > 0.0)) return out;  // degenerate splat (incl. non-finite)
    const T inv_det = 1.0 / det;
    out.conic_a = proj.cov2d.c * inv_det;
    out.conic_b = -proj.cov2d.b * inv_det;
    out.conic_c = proj.cov2d.a * inv_det;

    out.opacity = autodiff::sigmoid(p.opacity_logit);
    for (int c = 0; c < 3; ++c) {
        const T raw = 0.5 + kColorC0 * p.color[c];
        out.color[c] = scalar_value(raw) > 0.0 ? raw : T(0.0);  // clamp gate, frozen
    }

    // alpha <= opacity * exp(-d^T conic d / 2); solve for the distance where
    // it falls below the skip threshold. The small inflation keeps the bound
    // strict under floating-point rounding.
    const double o = scalar_value(out.opacity);
    if (o <= kAlphaSkip) return out;
    const double lambda_max = sym2_max_eigenvalue(out.cov2d);
    out.radius =
        std::sqrt(2.0 * std::log(255.0 * o) * lambda_max) * (1.0 + 1e-6) + 1e-6;
    out.valid = true;
    return out;
}

// Front-to-back alpha blending over a depth-sorted index list. Gating
// decisions (skip, clamp, early termination) are made on value parts only,
// so the Dual instantiation replays exactly the plain-double pass.
template <class T>
void blend_pixel(const PreparedSplat<T>* splats, std::span<const int> order, double px, double py,
                 T out_rgb[3], T& out_transmittance, int& contrib) {
    out_rgb[0] = T(0.0);
    out_rgb[1] = T(0.0);
    out_rgb[2] = T(0.0);
    T transmittance(1.0);
    contrib = 0;

    for (int idx : order) {
        const PreparedSplat<T>& s = splats[idx];
        const T dx = s.mean2d.x - px;
        const T dy = s.mean2d.y - py;
        const T power =
            -0.5 * (s.conic_a * dx * dx + s.conic_c * dy * dy) - s.conic_b * dx * dy;
        if (scalar_value(power) > 0.0) continue;

        using std::exp;
        T alpha = s.opacity * exp(power);
        if (scalar_value(alpha) > kAlphaClamp) alpha = T(kAlphaClamp);
        if (scalar_value(alpha) < kAlphaSkip) continue;

        const T test_t = transmittance * (1.0 - alpha);
        if (scalar_value(test_t) < kTransmittanceFloor) break;  // not blended

        const T weight = alpha * transmittance;
        for (int c = 0; c < 3; ++c) out_rgb[c] += weight * s.color[c];
        transmittance = test_t;
        ++contrib;
    }
    out_transmittance = transmittance;
}

struct TileGrid {
    int tiles_x = 0, tiles_y = 0;
    std::vector<std::vector<int>> lists;  // per tile: splat indices, ascending (depth, index)

    int tile_index(int tx, int ty) const { return ty * tiles_x + tx; }
    int tile_of_pixel(int px, int py) const {
        return tile_index(px / kTileSize, py / kTileSize);
    }
};

// Per-camera render state: all splats prepared plus the tile binning.
struct CameraContext {
    Camera cam;
    std::vector<SplatD> splats;
    TileGrid grid;
};

CameraContext prepare_camera(const GaussianSet& gaussians, const Camera& cam);

TileGrid build_tile_grid(std::span<const SplatD> splats, const Camera& cam);

// Spec surface: projection + binning in one call.
inline TileGrid bin_and_sort(const GaussianSet& gaussians, const Camera& cam) {
    return prepare_camera(gaussians, cam).grid;
}

struct PixelResult {
    double rgb[3];
    double transmittance;
    int contrib;
};

// Single-pixel evaluation over an explicitly ordered splat list.
PixelResult render_pixel(std::span<const SplatD> sorted_splats, double px, double py);

struct RenderOutput {
    Image image;
    std::vector<double> final_transmittance;  // height * width
    std::vector<int> contrib_count;           // height * width
};

RenderOutput render_full(const GaussianSet& gaussians, const Camera& cam);
RenderOutput render_with_context(const CameraContext& ctx);

// Elementwise rendered - ground truth. Throws on shape mismatch.
Image residuals(const Image& rendered, const Image& ground_truth);

}  // namespace splatlm::render
