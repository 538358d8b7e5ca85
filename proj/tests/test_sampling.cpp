#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "splatlm/metrics/image_metrics.hpp"
#include "splatlm/sampling/sample_plan.hpp"
#include "splatlm/sampling/view_sampler.hpp"
#include "support/oracles.hpp"

using namespace splatlm;
using namespace splatlm::sampling;

namespace {

std::vector<Camera> ring_cameras(int n, double radius = 3.0) {
    std::vector<Camera> cams;
    for (int i = 0; i < n; ++i) {
        Camera cam = oracles::test_camera(32, 0.0);
        const double a = 2.0 * 3.14159265358979 * i / n;
        cam.world_to_cam = {std::cos(a), 0, -std::sin(a), 0, 1, 0, std::sin(a), 0, std::cos(a)};
        cam.translation = {0, 0, radius};
        cams.push_back(cam);
    }
    return cams;
}

double kmeans_cost(std::span<const CameraFeature> feats,
                   const std::vector<std::vector<int>>& clusters) {
    double cost = 0.0;
    for (const auto& cluster : clusters) {
        CameraFeature mean{};
        for (int i : cluster)
            for (int d = 0; d < 6; ++d) mean.v[d] += feats[i].v[d];
        for (int d = 0; d < 6; ++d) mean.v[d] /= cluster.size();
        for (int i : cluster)
            for (int d = 0; d < 6; ++d) {
                const double diff = feats[i].v[d] - mean.v[d];
                cost += diff * diff;
            }
    }
    return cost;
}

}  // namespace

TEST_CASE("camera features are normalized") {
    const auto cams = ring_cameras(10);
    const auto feats = camera_features(cams);
    for (const auto& f : feats) {
        for (int d = 0; d < 3; ++d) {
            CHECK(f.v[d] >= -1e-12);
            CHECK(f.v[d] <= 1.0 + 1e-12);
        }
        const double n = f.v[3] * f.v[3] + f.v[4] * f.v[4] + f.v[5] * f.v[5];
        CHECK(n == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("kmeans partitions the camera set") {
    const auto cams = ring_cameras(12);
    const auto feats = camera_features(cams);

    for (int k : {1, 3, 5, 12}) {
        const auto clusters = kmeans_cameras(feats, k, 99);
        CHECK(static_cast<int>(clusters.size()) == k);
        std::set<int> seen;
        for (const auto& cluster : clusters) {
            CHECK(!cluster.empty());
            for (int i : cluster) CHECK(seen.insert(i).second);
        }
        CHECK(seen.size() == cams.size());
    }

    // pigeonhole: k == n gives singletons
    const auto singles = kmeans_cameras(feats, 12, 7);
    for (const auto& cluster : singles) CHECK(cluster.size() == 1);

    CHECK(kmeans_cameras(feats, 1, 7).front().size() == cams.size());
    CHECK_THROWS_AS(kmeans_cameras(feats, 13, 7), std::invalid_argument);
    CHECK_THROWS_AS(kmeans_cameras(feats, 0, 7), std::invalid_argument);
}

TEST_CASE("kmeans recovers two well-separated groups (brute-force oracle)") {
    // two tight clumps of camera positions
    std::vector<Camera> cams;
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (int i = 0; i < 10; ++i) {
        Camera cam = oracles::test_camera(32, 0.0);
        const double cx = i < 5 ? -2.0 : 2.0;
        cam.translation = {cx + jitter(rng), jitter(rng), 4.0 + jitter(rng)};
        cams.push_back(cam);
    }
    const auto feats = camera_features(cams);
    const auto clusters = kmeans_cameras(feats, 2, 5);

    // exhaustive 2-partition minimizer over <= 2^9 splits
    double best_cost = 1e300;
    std::vector<std::vector<int>> best;
    for (int mask = 1; mask < (1 << 9); ++mask) {
        std::vector<std::vector<int>> parts(2);
        parts[0].push_back(0);
        for (int i = 1; i < 10; ++i) parts[(mask >> (i - 1)) & 1].push_back(i);
        if (parts[0].empty() || parts[1].empty()) continue;
        const double cost = kmeans_cost(feats, parts);
        if (cost < best_cost) {
            best_cost = cost;
            best = parts;
        }
    }
    CHECK(kmeans_cost(feats, clusters) == doctest::Approx(best_cost).epsilon(1e-9));

    std::set<int> got0(clusters[0].begin(), clusters[0].end());
    const bool matches_groups = (got0 == std::set<int>{0, 1, 2, 3, 4}) ||
                                (got0 == std::set<int>{5, 6, 7, 8, 9});
    CHECK(matches_groups);
}

TEST_CASE("sample_view_batch draws one camera per cluster, uniformly") {
    const auto cams = ring_cameras(9);
    const auto feats = camera_features(cams);
    const auto clusters = kmeans_cameras(feats, 3, 17);
    std::mt19937_64 rng(62);

    std::map<int, int> counts;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        const auto batch = sample_view_batch(clusters, rng);
        CHECK(batch.size() == clusters.size());
        for (size_t c = 0; c < batch.size(); ++c) {
            const auto& cluster = clusters[c];
            CHECK(std::find(cluster.begin(), cluster.end(), batch[c]) != cluster.end());
            ++counts[batch[c]];
        }
    }
    // per-cluster binomial bounds: p = 1/|cluster| within 3 sigma
    for (const auto& cluster : clusters) {
        const double p = 1.0 / cluster.size();
        const double sigma = std::sqrt(draws * p * (1 - p));
        for (int cam : cluster) {
            CHECK(counts[cam] > draws * p - 3.5 * sigma);
            CHECK(counts[cam] < draws * p + 3.5 * sigma);
        }
    }

    // determinism under a fixed seed
    std::mt19937_64 r1(63), r2(63);
    CHECK(sample_view_batch(clusters, r1) == sample_view_batch(clusters, r2));

    // singleton clusters give the full set
    const auto singles = kmeans_cameras(feats, 9, 17);
    std::mt19937_64 r3(1);
    auto full = sample_view_batch(singles, r3);
    std::sort(full.begin(), full.end());
    for (int i = 0; i < 9; ++i) CHECK(full[i] == i);
}

TEST_CASE("exhaustive uniform stratum reproduces the exact loss") {
    std::mt19937_64 rng(64);
    const std::vector<Camera> cams = {oracles::test_camera(32, 3.0)};
    // N == 256 covers every pixel of every (full) tile exactly once
    auto plan = build_sample_plan(cams, 256, ResidualDist::kUniform, {}, rng);

    std::set<std::pair<int, int>> seen;
    for (size_t s = 0; s < plan.views[0].size(); ++s)
        CHECK(seen.insert({plan.views[0].px[s], plan.views[0].py[s]}).second);
    CHECK(seen.size() == 32u * 32u);

    const Image a = oracles::random_image(32, 32, rng);
    const Image b = oracles::random_image(32, 32, rng);
    const Image resid = render::residuals(a, b);
    CHECK(estimate_loss(plan, {&resid, 1}) == doctest::Approx(metrics::mse(a, b)).epsilon(1e-12));

    // uniform full-tile weight is the total pixel count
    for (double w : plan.views[0].weight) CHECK(w == doctest::Approx(1024.0));
}

TEST_CASE("stratification: exactly N samples per full tile, positive weights") {
    std::mt19937_64 rng(65);
    const std::vector<Camera> cams = {oracles::test_camera(40, 3.0)};  // 40 = 2.5 tiles: edges
    auto plan = build_sample_plan(cams, 32, ResidualDist::kUniform, {}, rng);

    std::map<int, int> per_tile;
    for (size_t s = 0; s < plan.views[0].size(); ++s) {
        ++per_tile[plan.views[0].tile[s]];
        CHECK(plan.views[0].px[s] >= 0);
        CHECK(plan.views[0].px[s] < 40);
        CHECK(plan.views[0].py[s] >= 0);
        CHECK(plan.views[0].py[s] < 40);
        CHECK(plan.views[0].weight[s] > 0.0);
        CHECK(std::isfinite(plan.views[0].weight[s]));
    }
    // 3x3 tile grid: 4 full tiles (256 px), 4 edge tiles 16x8, 1 corner 8x8
    for (const auto& [tile, count] : per_tile) {
        const int tx = tile % 3, ty = tile / 3;
        const int w = tx == 2 ? 8 : 16, h = ty == 2 ? 8 : 16;
        CHECK(count == std::min(32, w * h));
    }
    CHECK(plan.total_samples() == 4u * 32 + 4u * 32 + 32);
}

TEST_CASE("build_sample_plan validates its inputs") {
    std::mt19937_64 rng(66);
    const std::vector<Camera> cams = {oracles::test_camera(32, 3.0)};
    CHECK_THROWS_AS(build_sample_plan(cams, 257, ResidualDist::kUniform, {}, rng, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sample_plan(cams, 0, ResidualDist::kUniform, {}, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sample_plan(cams, 48, ResidualDist::kUniform, {}, rng),  // not 32k
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sample_plan(cams, 32, ResidualDist::kResidual, {}, rng),
                    std::invalid_argument);
}

TEST_CASE("Monte-Carlo estimator is unbiased for all three distributions") {
    std::mt19937_64 scene_rng(67);
    const std::vector<Camera> cams = {oracles::test_camera(64, 3.0)};
    const GaussianSet scene = oracles::random_scene(25, scene_rng);
    const auto rendered = render::render_full(scene, cams[0]);
    const Image target = oracles::random_image(64, 64, scene_rng);
    const Image gt_resid = render::residuals(rendered.image, target);
    const double exact = metrics::mse(rendered.image, target);

    const PlanAux aux{&rendered, &target};
    std::mt19937_64 rng(68);
    for (auto dist :
         {ResidualDist::kUniform, ResidualDist::kResidual, ResidualDist::kGaussianCount}) {
        const int trials = 1000;
        double sum = 0.0, sum_sq = 0.0;
        for (int t = 0; t < trials; ++t) {
            const auto plan = build_sample_plan(cams, 32, dist, {&aux, 1}, rng);
            const double est = estimate_loss(plan, {&gt_resid, 1});
            sum += est;
            sum_sq += est * est;
        }
        const double mean = sum / trials;
        const double var = std::max(0.0, sum_sq / trials - mean * mean);
        const double se = std::sqrt(var / trials);
        INFO("dist ", static_cast<int>(dist), " mean ", mean, " exact ", exact, " se ", se);
        CHECK(std::abs(mean - exact) <= 3.0 * std::max(se, 1e-12));
    }
}

TEST_CASE("residual distribution concentrates on a dominant pixel") {
    const std::vector<Camera> cams = {oracles::test_camera(16, 3.0)};  // single tile
    render::RenderOutput fake;
    fake.image = Image(16, 16);
    fake.final_transmittance.assign(256, 1.0);
    fake.contrib_count.assign(256, 0);
    Image target(16, 16);
    target.at(5, 7, 0) = target.at(5, 7, 1) = target.at(5, 7, 2) = 1.0;  // all residual mass

    const PlanAux aux{&fake, &target};
    std::mt19937_64 rng(69);
    int hits = 0, total = 0;
    for (int t = 0; t < 300; ++t) {
        const auto plan = build_sample_plan(cams, 32, ResidualDist::kResidual, {&aux, 1}, rng);
        for (size_t s = 0; s < plan.views[0].size(); ++s, ++total)
            hits += plan.views[0].px[s] == 5 && plan.views[0].py[s] == 7;
    }
    // closed-form softmax: p(dominant) = e^1 / (e^1 + 255 e^0)
    const double expect = std::exp(1.0) / (std::exp(1.0) + 255.0);
    const double freq = static_cast<double>(hits) / total;
    const double sigma = std::sqrt(expect * (1 - expect) / total);
    CHECK(std::abs(freq - expect) < 4.0 * sigma);
}

TEST_CASE("gaussian-count distribution weights by contributor counts") {
    const std::vector<Camera> cams = {oracles::test_camera(16, 3.0)};
    render::RenderOutput fake;
    fake.image = Image(16, 16);
    fake.final_transmittance.assign(256, 1.0);
    fake.contrib_count.assign(256, 0);
    fake.contrib_count[3 * 16 + 9] = 12;  // only pixel (9, 3) has contributors
    Image target(16, 16);

    const PlanAux aux{&fake, &target};
    std::mt19937_64 rng(70);
    int hits = 0, total = 0;
    for (int t = 0; t < 300; ++t) {
        const auto plan = build_sample_plan(cams, 32, ResidualDist::kGaussianCount, {&aux, 1}, rng);
        for (size_t s = 0; s < plan.views[0].size(); ++s, ++total)
            hits += plan.views[0].px[s] == 9 && plan.views[0].py[s] == 3;
    }
    // counts carry a +1 support floor: p = 13 / (255 + 13)
    const double expect = 13.0 / 268.0;
    const double freq = static_cast<double>(hits) / total;
    const double sigma = std::sqrt(expect * (1 - expect) / total);
    CHECK(std::abs(freq - expect) < 4.0 * sigma);
}
