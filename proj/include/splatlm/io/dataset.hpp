#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "splatlm/core/types.hpp"
#include "splatlm/io/image_io.hpp"

namespace splatlm::io {

struct SceneDataset {
    std::vector<Camera> cameras;
    std::vector<ImageF> images;
    std::string split;  // "train" / "test"
};

// NeRF-synthetic layout: transforms_{split}.json with camera_angle_x and
// per-frame camera-to-world matrices (OpenGL convention, camera looks down
// -z), images referenced relative to the directory, RGBA over black.
// fx = fy = 0.5 * width / tan(0.5 * camera_angle_x).
SceneDataset load_nerf_synthetic(const std::filesystem::path& dir, const std::string& split);

// "x y z r g b" per line; rgb in [0,1] or [0,255] (auto-detected).
struct PointCloud {
    std::vector<double> xyz;  // 3N
    std::vector<double> rgb;  // 3N in [0,1]
};
PointCloud load_points_xyzrgb(const std::filesystem::path& path);

// Gaussians centered on the points with 3DGS-style defaults (opacity 0.1,
// scale from the mean point spacing, identity rotations).
GaussianSet init_from_points(const PointCloud& points);

// Uniform means inside the cube, colors uniform over the valid coefficient
// range, opacity 0.1, isotropic scale cube_edge * G^(-1/3) * 0.5, identity
// rotations.
GaussianSet random_init(int count, const Vec3<double>& cube_min, const Vec3<double>& cube_max,
                        std::mt19937_64& rng);

}  // namespace splatlm::io
