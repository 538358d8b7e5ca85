#include "splatlm/render/rasterizer.hpp"

#include <numeric>
#include <stdexcept>

#include "splatlm/core/parallel.hpp"

namespace splatlm::render {

CameraContext prepare_camera(const GaussianSet& gaussians, const Camera& cam) {
    CameraContext ctx;
    ctx.cam = cam;
    ctx.splats.resize(gaussians.count);
    parallel_for(gaussians.count, [&](std::size_t g) {
        ctx.splats[g] = prepare_splat(params_of(gaussians, static_cast<int>(g)), cam);
    });
    ctx.grid = build_tile_grid(ctx.splats, cam);
    return ctx;
}

TileGrid build_tile_grid(std::span<const SplatD> splats, const Camera& cam) {
    TileGrid grid;
    grid.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    grid.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    grid.lists.assign(static_cast<size_t>(grid.tiles_x) * grid.tiles_y, {});

    for (int g = 0; g < static_cast<int>(splats.size()); ++g) {
        const SplatD& s = splats[g];
        if (!s.valid) continue;
        const double r = s.radius;
        const int x0 = std::max(0, static_cast<int>(std::floor((s.mean2d.x - r) / kTileSize)));
        const int x1 = std::min(grid.tiles_x - 1,
                                static_cast<int>(std::floor((s.mean2d.x + r) / kTileSize)));
        const int y0 = std::max(0, static_cast<int>(std::floor((s.mean2d.y - r) / kTileSize)));
        const int y1 = std::min(grid.tiles_y - 1,
                                static_cast<int>(std::floor((s.mean2d.y + r) / kTileSize)));
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx) grid.lists[grid.tile_index(tx, ty)].push_back(g);
    }

    // Front-to-back order; ties broken by storage index (stable under
    // permutations of equal-depth Gaussians).
    for (auto& list : grid.lists) {
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            if (splats[a].depth != splats[b].depth) return splats[a].depth < splats[b].depth;
            return a < b;
        });
    }
    return grid;
}

PixelResult render_pixel(std::span<const SplatD> sorted_splats, double px, double py) {
    std::vector<int> order(sorted_splats.size());
    std::iota(order.begin(), order.end(), 0);
    PixelResult res;
    double transmittance;
    blend_pixel(sorted_splats.data(), order, px, py, res.rgb, transmittance, res.contrib);
    res.transmittance = transmittance;
    return res;
}

RenderOutput render_with_context(const CameraContext& ctx) {
    const Camera& cam = ctx.cam;
    RenderOutput out;
    out.image = Image(cam.width, cam.height);
    out.final_transmittance.assign(static_cast<size_t>(cam.width) * cam.height, 1.0);
    out.contrib_count.assign(static_cast<size_t>(cam.width) * cam.height, 0);

    const size_t n_tiles = ctx.grid.lists.size();
    parallel_for(n_tiles, [&](std::size_t tile) {
        const std::vector<int>& list = ctx.grid.lists[tile];
        const int tx = static_cast<int>(tile) % ctx.grid.tiles_x;
        const int ty = static_cast<int>(tile) / ctx.grid.tiles_x;
        const int x0 = tx * kTileSize, x1 = std::min(cam.width, x0 + kTileSize);
        const int y0 = ty * kTileSize, y1 = std::min(cam.height, y0 + kTileSize);

        double rgb[3];
        double transmittance;
        int contrib;
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                blend_pixel(ctx.splats.data(), std::span<const int>(list), x + 0.5, y + 0.5,
                            rgb, transmittance, contrib);
                for (int c = 0; c < 3; ++c) out.image.at(x, y, c) = rgb[c];
                out.final_transmittance[static_cast<size_t>(y) * cam.width + x] = transmittance;
                out.contrib_count[static_cast<size_t>(y) * cam.width + x] = contrib;
            }
        }
    });
    return out;
}

RenderOutput render_full(const GaussianSet& gaussians, const Camera& cam) {
    return render_with_context(prepare_camera(gaussians, cam));
}

Image residuals(const Image& rendered, const Image& ground_truth) {
    if (rendered.width != ground_truth.width || rendered.height != ground_truth.height)
        throw std::invalid_argument("residuals: image shapes differ");
    Image out(rendered.width, rendered.height);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = rendered.data[i] - ground_truth.data[i];
    return out;
}

}  // namespace splatlm::render
