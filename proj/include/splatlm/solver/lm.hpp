#pragma once

#include <random>
#include <span>
#include <vector>

#include "splatlm/core/types.hpp"
#include "splatlm/sampling/sample_plan.hpp"

namespace splatlm::solver {

enum class LossKind { kMse, kMseSsim };

struct LmConfig {
    double damping = 0.1;
    int pcg_iters_initial = 3;
    int pcg_iters_late = 8;
    int pcg_switch_iteration = 50;
    int batch_size_initial = 8;
    int batch_size_late = 8;
    int batch_switch_iteration = 50;
    int samples_per_tile = 32;
    int sample_lane_width = sampling::kDefaultLaneWidth;
    double lr_cap = 0.2;
    double warmup_lr = 0.05;
    int warmup_iterations = 10;
    sampling::ResidualDist dist = sampling::ResidualDist::kUniform;
    LossKind loss = LossKind::kMse;
    double ssim_weight = 0.2;

    int pcg_iters_at(int iteration) const {
        return iteration >= pcg_switch_iteration ? pcg_iters_late : pcg_iters_initial;
    }
    int batch_size_at(int iteration) const {
        return iteration >= batch_switch_iteration ? batch_size_late : batch_size_initial;
    }

    // Preset matching the real-world schedule (batch 16 -> 32, PCG 5 -> 8).
    static LmConfig real_world_preset();
};

struct StepReport {
    int iteration = 0;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double eta = 0.0;
    int pcg_iterations = 0;
    bool breakdown = false;
    std::vector<int> batch;  // camera indices used this step
};

// Training set plus the camera clustering the view sampler draws from.
struct TrainData {
    std::vector<Camera> cameras;
    std::vector<Image> images;
    std::vector<std::vector<int>> clusters;

    // Clusters for a batch of size k (k-means over camera features).
    void rebuild_clusters(int k, std::uint64_t seed);
};

// Dynamic learning rate: warmup_lr for the first warmup_iterations, then the
// largest color-coefficient move m picks eta = min(lr_cap, 1/m) when m > 1
// and min(lr_cap, 1) otherwise. The same eta scales every parameter group.
double learning_rate(const ParamVector& delta, int iteration, const LmConfig& cfg);

// One damped Gauss-Newton step: view batch, forward render, residual
// sampling, matrix-free PCG on (J^T W J + lambda I) x = -J^T W r, dynamic
// learning rate, parameter update with rotation re-normalization.
StepReport lm_step(GaussianSet& state, const TrainData& data, const LmConfig& cfg, int iteration,
                   std::mt19937_64& rng);

// Batch training loss for reporting: MSE, plus the weighted diagonal SSIM
// term when configured.
double batch_loss(const GaussianSet& state, std::span<const Camera> cams,
                  std::span<const Image> gts, LossKind loss, double ssim_weight);

}  // namespace splatlm::solver
