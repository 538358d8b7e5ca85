#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "splatlm/core/types.hpp"

namespace splatlm::sampling {

// 6-D camera descriptor: position normalized into [0,1]^3 over the camera
// set's bounding box, followed by the unit viewing direction.
struct CameraFeature {
    std::array<double, 6> v{};
};

std::vector<CameraFeature> camera_features(std::span<const Camera> cams);

// Lloyd iterations from k-means++ seeding until the assignment reaches a
// fixpoint (at most 100 iterations). Clusters partition [0, n); empty
// clusters are re-seeded from the point farthest from its centroid.
// Throws std::invalid_argument when k < 1 or k > n.
std::vector<std::vector<int>> kmeans_cameras(std::span<const CameraFeature> features, int k,
                                             std::uint64_t seed);

// One uniformly chosen camera per cluster.
std::vector<int> sample_view_batch(const std::vector<std::vector<int>>& clusters,
                                   std::mt19937_64& rng);

}  // namespace splatlm::sampling
