#include "splatlm/sampling/view_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace splatlm::sampling {

std::vector<CameraFeature> camera_features(std::span<const Camera> cams) {
    std::vector<CameraFeature> feats(cams.size());
    if (cams.empty()) return feats;

    double lo[3] = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                    std::numeric_limits<double>::max()};
    double hi[3] = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
                    std::numeric_limits<double>::lowest()};
    for (const auto& cam : cams) {
        const auto p = cam.position();
        const double v[3] = {p.x, p.y, p.z};
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
        }
    }

    for (size_t c = 0; c < cams.size(); ++c) {
        const auto p = cams[c].position();
        const auto d = cams[c].direction();
        const double v[3] = {p.x, p.y, p.z};
        for (int i = 0; i < 3; ++i) {
            const double extent = hi[i] - lo[i];
            feats[c].v[i] = extent > 1e-12 ? (v[i] - lo[i]) / extent : 0.5;
        }
        feats[c].v[3] = d.x;
        feats[c].v[4] = d.y;
        feats[c].v[5] = d.z;
    }
    return feats;
}

namespace {

double dist_sq(const CameraFeature& a, const CameraFeature& b) {
    double acc = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double d = a.v[i] - b.v[i];
        acc += d * d;
    }
    return acc;
}

// k-means++ seeding: next centroid drawn proportionally to the squared
// distance from the nearest already-chosen one.
std::vector<CameraFeature> seed_centroids(std::span<const CameraFeature> feats, int k,
                                          std::mt19937_64& rng) {
    const int n = static_cast<int>(feats.size());
    std::vector<CameraFeature> centroids;
    std::vector<bool> chosen(n, false);

    std::uniform_int_distribution<int> first(0, n - 1);
    int idx = first(rng);
    centroids.push_back(feats[idx]);
    chosen[idx] = true;

    std::vector<double> d2(n);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            d2[i] = std::numeric_limits<double>::max();
            for (const auto& c : centroids) d2[i] = std::min(d2[i], dist_sq(feats[i], c));
            if (chosen[i]) d2[i] = 0.0;
            total += d2[i];
        }
        int pick = -1;
        if (total > 0.0) {
            std::uniform_real_distribution<double> uni(0.0, total);
            double u = uni(rng);
            for (int i = 0; i < n; ++i) {
                u -= d2[i];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;
        }
        if (pick < 0 || chosen[pick]) {
            // all remaining distances are zero (duplicate features)
            pick = static_cast<int>(std::find(chosen.begin(), chosen.end(), false) -
                                    chosen.begin());
        }
        centroids.push_back(feats[pick]);
        chosen[pick] = true;
    }
    return centroids;
}

}  // namespace

std::vector<std::vector<int>> kmeans_cameras(std::span<const CameraFeature> features, int k,
                                             std::uint64_t seed) {
    const int n = static_cast<int>(features.size());
    if (k < 1) throw std::invalid_argument("cluster count must be at least 1");
    if (k > n) throw std::invalid_argument("cluster count exceeds camera count");

    std::mt19937_64 rng(seed);
    std::vector<CameraFeature> centroids = seed_centroids(features, k, rng);
    std::vector<int> assign(n, -1);

    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist_sq(features[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist_sq(features[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }

        std::vector<int> sizes(k, 0);
        for (int a : assign) ++sizes[a];
        for (int c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            // Re-seed an empty cluster from the farthest point of a
            // non-singleton cluster.
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (sizes[assign[i]] <= 1) continue;
                const double d = dist_sq(features[i], centroids[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) continue;
            --sizes[assign[far]];
            assign[far] = c;
            ++sizes[c];
            centroids[c] = features[far];
            changed = true;
        }

        for (int c = 0; c < k; ++c) {
            CameraFeature mean{};
            int count = 0;
            for (int i = 0; i < n; ++i) {
                if (assign[i] != c) continue;
                for (int d = 0; d < 6; ++d) mean.v[d] += features[i].v[d];
                ++count;
            }
            if (count > 0)
                for (int d = 0; d < 6; ++d) centroids[c].v[d] = mean.v[d] / count;
        }

        if (!changed) break;
    }

    std::vector<std::vector<int>> clusters(k);
    for (int i = 0; i < n; ++i) clusters[assign[i]].push_back(i);
    return clusters;
}

std::vector<int> sample_view_batch(const std::vector<std::vector<int>>& clusters,
                                   std::mt19937_64& rng) {
    if (clusters.empty()) throw std::invalid_argument("no clusters to sample from");
    std::vector<int> batch;
    batch.reserve(clusters.size());
    for (const auto& cluster : clusters) {
        if (cluster.empty()) throw std::invalid_argument("empty cluster in batch sampler");
        std::uniform_int_distribution<size_t> dist(0, cluster.size() - 1);
        batch.push_back(cluster[dist(rng)]);
    }
    return batch;
}

}  // namespace splatlm::sampling
