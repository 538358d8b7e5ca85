#pragma once

#include <random>

#include "splatlm/io/dataset.hpp"

namespace splatlm::io {

// Self-contained synthetic scene: known ground-truth Gaussians rendered from
// ring-arranged cameras, so optimizers can be measured against an exact
// answer.
struct ToyScene {
    GaussianSet ground_truth;
    SceneDataset train;
    SceneDataset test;
};

struct ToySceneConfig {
    int gaussians = 20;
    int train_cameras = 8;
    int test_cameras = 4;
    int image_size = 64;
};

// Throws std::invalid_argument when gaussians < 1. The returned dataset
// images are renders of ground_truth from the returned cameras.
ToyScene generate_toy_scene(const ToySceneConfig& cfg, std::mt19937_64& rng);

// Camera on a ring of the given radius/height looking at the origin.
Camera ring_camera(double angle, double radius, double height, int image_size);

}  // namespace splatlm::io
