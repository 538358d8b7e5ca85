#include "splatlm/sampling/sample_plan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace splatlm::sampling {

const char* to_string(ResidualDist d) {
    switch (d) {
        case ResidualDist::kUniform: return "uniform";
        case ResidualDist::kResidual: return "residual";
        case ResidualDist::kGaussianCount: return "gaussian";
    }
    return "unknown";
}

size_t SamplePlan::total_samples() const {
    size_t n = 0;
    for (const auto& v : views) n += v.size();
    return n;
}

namespace {

constexpr double kMinDensity = 1e-12;

struct TileRect {
    int x0, y0, w, h;
    int pixels() const { return w * h; }
};

TileRect tile_rect(const Camera& cam, int tx, int ty) {
    const int x0 = tx * render::kTileSize;
    const int y0 = ty * render::kTileSize;
    return {x0, y0, std::min(cam.width - x0, render::kTileSize),
            std::min(cam.height - y0, render::kTileSize)};
}

// Distinct uniform indices in [0, m) via partial Fisher-Yates.
std::vector<int> draw_without_replacement(int m, int n, std::mt19937_64& rng) {
    std::vector<int> pool(m);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < n; ++i) {
        std::uniform_int_distribution<int> dist(i, m - 1);
        std::swap(pool[i], pool[dist(rng)]);
    }
    pool.resize(n);
    return pool;
}

int draw_from_cdf(const std::vector<double>& cdf, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u = uni(rng) * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<int>(static_cast<int>(it - cdf.begin()), static_cast<int>(cdf.size()) - 1);
}

}  // namespace

SamplePlan build_sample_plan(std::span<const Camera> cams, int samples_per_tile,
                             ResidualDist dist, std::span<const PlanAux> aux,
                             std::mt19937_64& rng, int lane_width) {
    if (samples_per_tile < 1) throw std::invalid_argument("samples_per_tile must be positive");
    if (samples_per_tile > render::kTileSize * render::kTileSize)
        throw std::invalid_argument("samples_per_tile exceeds the pixels in a tile");
    if (lane_width < 1 || samples_per_tile % lane_width != 0)
        throw std::invalid_argument("samples_per_tile must be a multiple of the lane width");
    if (dist != ResidualDist::kUniform) {
        if (aux.size() != cams.size())
            throw std::invalid_argument("weighted distributions need per-camera aux data");
        for (const auto& a : aux) {
            if (!a.rendered) throw std::invalid_argument("missing forward-pass aux data");
            if (dist == ResidualDist::kResidual && !a.ground_truth)
                throw std::invalid_argument("residual distribution needs ground-truth images");
        }
    }

    SamplePlan plan;
    plan.samples_per_tile = samples_per_tile;
    plan.dist = dist;

    // Per-tile draw counts are fixed up front, so the batch-wide sample total
    // (part of every mixture density) is known before drawing.
    size_t total = 0;
    for (const auto& cam : cams) {
        const int tiles_x = (cam.width + render::kTileSize - 1) / render::kTileSize;
        const int tiles_y = (cam.height + render::kTileSize - 1) / render::kTileSize;
        for (int ty = 0; ty < tiles_y; ++ty)
            for (int tx = 0; tx < tiles_x; ++tx)
                total += std::min(samples_per_tile, tile_rect(cam, tx, ty).pixels());
    }
    const double n_total = static_cast<double>(total);

    for (size_t ci = 0; ci < cams.size(); ++ci) {
        const Camera& cam = cams[ci];
        const int tiles_x = (cam.width + render::kTileSize - 1) / render::kTileSize;
        const int tiles_y = (cam.height + render::kTileSize - 1) / render::kTileSize;

        SampleView view;
        view.camera = static_cast<int>(ci);

        std::vector<double> density;  // within-tile pmf, reused per tile
        std::vector<double> cdf;
        for (int ty = 0; ty < tiles_y; ++ty) {
            for (int tx = 0; tx < tiles_x; ++tx) {
                const TileRect rect = tile_rect(cam, tx, ty);
                const int m = rect.pixels();
                const int n = std::min(samples_per_tile, m);
                const int tile = ty * tiles_x + tx;
                auto emit = [&](int local, double q_tile) {
                    view.px.push_back(rect.x0 + local % rect.w);
                    view.py.push_back(rect.y0 + local / rect.w);
                    view.tile.push_back(tile);
                    const double q = (n / n_total) * q_tile;
                    view.weight.push_back(1.0 / std::max(q, kMinDensity));
                };

                if (dist == ResidualDist::kUniform) {
                    // Without replacement; inclusion probability n/m keeps the
                    // 1/q estimator exact (and zero-variance when exhaustive).
                    for (int local : draw_without_replacement(m, n, rng)) emit(local, 1.0 / m);
                    continue;
                }

                density.assign(m, 0.0);
                if (dist == ResidualDist::kResidual) {
                    // softmax of |residual| within the tile
                    double vmax = -1.0;
                    for (int local = 0; local < m; ++local) {
                        const int x = rect.x0 + local % rect.w, y = rect.y0 + local / rect.w;
                        double v = 0.0;
                        for (int c = 0; c < 3; ++c)
                            v += std::abs(aux[ci].rendered->image.at(x, y, c) -
                                          aux[ci].ground_truth->at(x, y, c));
                        density[local] = v / 3.0;
                        vmax = std::max(vmax, density[local]);
                    }
                    double sum = 0.0;
                    for (double& v : density) sum += (v = std::exp(v - vmax));
                    for (double& v : density) v /= sum;
                } else {
                    // contributor counts, offset by one so every pixel keeps
                    // sampling support (zero-probability pixels with nonzero
                    // residual would bias the estimator)
                    double sum = 0.0;
                    for (int local = 0; local < m; ++local) {
                        const int x = rect.x0 + local % rect.w, y = rect.y0 + local / rect.w;
                        sum += (density[local] =
                                    1.0 + aux[ci].rendered->contrib_count[static_cast<size_t>(y) *
                                                                              cam.width +
                                                                          x]);
                    }
                    for (double& v : density) v /= sum;
                }

                // With replacement so the 1/q weights stay unbiased under a
                // non-uniform within-tile density.
                cdf.resize(m);
                std::partial_sum(density.begin(), density.end(), cdf.begin());
                for (int k = 0; k < n; ++k) {
                    const int local = draw_from_cdf(cdf, rng);
                    emit(local, density[local]);
                }
            }
        }
        plan.views.push_back(std::move(view));
    }
    return plan;
}

SamplePlan exhaustive_plan(std::span<const Camera> cams) {
    SamplePlan plan;
    plan.samples_per_tile = render::kTileSize * render::kTileSize;
    plan.dist = ResidualDist::kUniform;

    double n_total = 0;
    for (const auto& cam : cams) n_total += static_cast<double>(cam.width) * cam.height;

    for (size_t ci = 0; ci < cams.size(); ++ci) {
        const Camera& cam = cams[ci];
        const int tiles_x = (cam.width + render::kTileSize - 1) / render::kTileSize;
        SampleView view;
        view.camera = static_cast<int>(ci);
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                view.px.push_back(x);
                view.py.push_back(y);
                view.tile.push_back((y / render::kTileSize) * tiles_x + x / render::kTileSize);
                view.weight.push_back(n_total);  // 1/q with q = 1/M
            }
        }
        plan.views.push_back(std::move(view));
    }
    return plan;
}

double estimate_loss(const SamplePlan& plan, std::span<const Image> residual_fields) {
    if (residual_fields.size() != plan.views.size())
        throw std::invalid_argument("one residual field per plan view required");
    const size_t n_total = plan.total_samples();
    if (n_total == 0) return 0.0;

    double pixels = 0.0;
    for (const auto& img : residual_fields) pixels += static_cast<double>(img.pixel_count());

    double acc = 0.0;
    for (size_t vi = 0; vi < plan.views.size(); ++vi) {
        const SampleView& view = plan.views[vi];
        const Image& r = residual_fields[vi];
        for (size_t s = 0; s < view.size(); ++s) {
            double sq = 0.0;
            for (int c = 0; c < 3; ++c) {
                const double v = r.at(view.px[s], view.py[s], c);
                sq += v * v;
            }
            acc += view.weight[s] * sq;
        }
    }
    return acc / (static_cast<double>(n_total) * pixels * 3.0);
}

}  // namespace splatlm::sampling
