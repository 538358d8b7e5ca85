#pragma once

#include <random>
#include <span>
#include <vector>

#include "splatlm/core/types.hpp"
#include "splatlm/render/rasterizer.hpp"

namespace splatlm::sampling {

// Pixel sampling distribution inside each tile.
enum class ResidualDist { kUniform, kResidual, kGaussianCount };

const char* to_string(ResidualDist d);

// Samples drawn for one camera of the batch. Weights are importance weights
// 1/q(i), where q is the mixture density of the stratified sampler over the
// whole batch domain: q(i) = (n_tile / N_total) * q_tile(i). With the uniform
// distribution on full tiles this reduces to 1/q = total pixel count, so the
// Monte-Carlo estimator reproduces the mean loss.
struct SampleView {
    int camera = 0;  // index into the batch passed to build_sample_plan
    std::vector<int> px, py;
    std::vector<double> weight;
    std::vector<int> tile;

    size_t size() const { return px.size(); }
};

struct SamplePlan {
    std::vector<SampleView> views;
    int samples_per_tile = 0;
    ResidualDist dist = ResidualDist::kUniform;

    size_t total_samples() const;
};

// Per-camera data required by the non-uniform distributions; rendered and
// ground_truth feed |residual| for kResidual, the contribution counts feed
// kGaussianCount.
struct PlanAux {
    const render::RenderOutput* rendered = nullptr;
    const Image* ground_truth = nullptr;
};

inline constexpr int kDefaultLaneWidth = 32;

// Stratified per-tile sampling: n_tile = min(samples_per_tile, tile pixels)
// from every tile. Uniform draws are without replacement; the weighted
// distributions draw with replacement so the 1/q weights keep the estimator
// unbiased. samples_per_tile must be a positive multiple of lane_width and
// no larger than a full tile.
SamplePlan build_sample_plan(std::span<const Camera> cams, int samples_per_tile,
                             ResidualDist dist, std::span<const PlanAux> aux,
                             std::mt19937_64& rng, int lane_width = kDefaultLaneWidth);

// Every pixel exactly once (used by full-gradient paths and oracles).
SamplePlan exhaustive_plan(std::span<const Camera> cams);

// Monte-Carlo estimate of the batch mean-squared error from sampled
// residuals; unbiased for the exact MSE over all pixels and channels.
double estimate_loss(const SamplePlan& plan, std::span<const Image> residual_fields);

}  // namespace splatlm::sampling
