#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "splatlm/baselines/first_order.hpp"
#include "splatlm/io/scene_gen.hpp"
#include "splatlm/metrics/image_metrics.hpp"
#include "splatlm/solver/lm.hpp"

namespace splatlm::io {

struct RunConfig {
    std::string scene;             // "toy" or a dataset directory
    std::string optimizer = "lm";  // lm | adam | rmsprop | sgd
    int iterations = 200;
    std::uint64_t seed = 1;
    std::filesystem::path out_dir;
    int gaussians = 0;  // 0 -> 40 for the toy scene, 10000 for datasets
    solver::LmConfig lm;
    baselines::FirstOrderConfig first_order;
    int eval_every = 50;
    bool deterministic = false;  // omit wall-clock fields so runs are byte-comparable
    std::string points_file;     // optional xyzrgb initialization
    int threads = 0;             // 0 = hardware
    std::uint64_t scene_seed = 20214;  // toy scene content (independent of --seed)
    ToySceneConfig toy;
};

// metrics.csv schema (stable):
// iter,wall_ms,train_loss,test_psnr,test_ssim,eta,pcg_iters,breakdown
// Non-applicable fields stay empty; wall_ms is empty in deterministic mode.
inline constexpr const char* kMetricsCsvHeader =
    "iter,wall_ms,train_loss,test_psnr,test_ssim,eta,pcg_iters,breakdown";

struct TrainResult {
    double final_train_loss = 0.0;
    metrics::MetricReport final_test;
    std::filesystem::path checkpoint;
    std::filesystem::path metrics_csv;
};

TrainResult train_run(const RunConfig& cfg);

metrics::MetricReport eval_run(const RunConfig& cfg, const std::filesystem::path& checkpoint);

// Writes the toy scene as an on-disk dataset (16-bit PNGs, transforms JSON,
// ground-truth checkpoint) under cfg.out_dir.
void datagen_run(const RunConfig& cfg);

// Renders the scene's test cameras (train if no test split) from a
// checkpoint into cfg.out_dir.
void render_run(const RunConfig& cfg, const std::filesystem::path& checkpoint);

}  // namespace splatlm::io
