#include <doctest.h>

#include <random>

#include "splatlm/autodiff/jacobian.hpp"
#include "splatlm/core/parallel.hpp"
#include "splatlm/metrics/image_metrics.hpp"
#include "support/oracles.hpp"

using namespace splatlm;
using autodiff::SampledJacobian;

namespace {

struct Fixture {
    GaussianSet scene;
    std::vector<Camera> cams;
    sampling::SamplePlan plan;

    Fixture(int gaussians, int size, uint64_t seed, int samples_per_tile = 0) {
        std::mt19937_64 rng(seed);
        scene = oracles::random_scene(gaussians, rng);
        cams = {oracles::test_camera(size, 3.0)};
        if (samples_per_tile == 0) {
            plan = sampling::exhaustive_plan(cams);
        } else {
            plan = sampling::build_sample_plan(cams, samples_per_tile,
                                               sampling::ResidualDist::kUniform, {}, rng,
                                               /*lane_width=*/1);
        }
    }
};

ParamVector random_param_vector(size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ParamVector v(n);
    for (double& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("jvp: zero probe gives zero output") {
    Fixture fx(4, 32, 41);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    const auto out = jac.jvp(ParamVector(jac.param_dim(), 0.0));
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("jvp color column equals alpha * T * C0 on a single-Gaussian pixel") {
    std::mt19937_64 rng(42);
    GaussianSet scene = oracles::random_scene(1, rng);
    scene.colors = {0.5, 0.3, -0.2};  // gates open on all channels
    const std::vector<Camera> cams = {oracles::test_camera(32, 3.0)};
    const auto plan = sampling::exhaustive_plan(cams);
    SampledJacobian jac(scene, cams, plan);

    // find a pixel the Gaussian actually covers
    const auto out = render::render_full(scene, cams[0]);
    int px = -1, py = -1;
    for (int y = 0; y < 32 && px < 0; ++y)
        for (int x = 0; x < 32 && px < 0; ++x)
            if (out.contrib_count[y * 32 + x] == 1) {
                px = x;
                py = y;
            }
    REQUIRE(px >= 0);

    ParamVector e(jac.param_dim(), 0.0);
    e[kColorOffset] = 1.0;  // red coefficient
    const auto col = jac.jvp(e);

    const double alpha_t = 1.0 - out.final_transmittance[py * 32 + px];  // single splat: alpha*T
    const size_t row = 3 * (static_cast<size_t>(py) * 32 + px);
    CHECK(col[row] == doctest::Approx(alpha_t * kColorC0).epsilon(1e-10));
    CHECK(col[row + 1] == 0.0);  // red coefficient does not move other channels
    CHECK(col[row + 2] == 0.0);
}

TEST_CASE("jvp matches central finite differences of the sampled render") {
    Fixture fx(3, 32, 43);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    std::mt19937_64 rng(44);
    const ParamVector v = random_param_vector(jac.param_dim(), rng);
    const auto got = jac.jvp(v);

    const double eps = 1e-6;
    ParamVector params = fx.scene.pack();
    ParamVector plus = params, minus = params;
    for (size_t j = 0; j < params.size(); ++j) {
        plus[j] += eps * v[j];
        minus[j] -= eps * v[j];
    }
    const auto img_p = render::render_full(GaussianSet::unpack(plus), fx.cams[0]).image;
    const auto img_m = render::render_full(GaussianSet::unpack(minus), fx.cams[0]).image;

    double max_rel = 0.0;
    for (size_t i = 0; i < got.size(); ++i) {
        const double fd = (img_p.data[i] - img_m.data[i]) / (2 * eps);
        if (std::abs(fd) < 1e-8 && std::abs(got[i]) < 1e-8) continue;
        max_rel = std::max(max_rel, std::abs(got[i] - fd) / std::max(std::abs(fd), 1e-8));
    }
    CHECK(max_rel < 1e-5);
}

TEST_CASE("jvp is linear in the probe") {
    Fixture fx(4, 32, 45, 16);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    std::mt19937_64 rng(46);
    const ParamVector v1 = random_param_vector(jac.param_dim(), rng);
    const ParamVector v2 = random_param_vector(jac.param_dim(), rng);
    ParamVector combo(jac.param_dim());
    const double a = 1.7, b = -0.6;
    for (size_t i = 0; i < combo.size(); ++i) combo[i] = a * v1[i] + b * v2[i];

    const auto j1 = jac.jvp(v1), j2 = jac.jvp(v2), jc = jac.jvp(combo);
    double scale = 0.0;
    for (double x : jc) scale = std::max(scale, std::abs(x));
    for (size_t i = 0; i < jc.size(); ++i)
        CHECK(std::abs(jc[i] - (a * j1[i] + b * j2[i])) <= 1e-12 * std::max(scale, 1.0));
}

TEST_CASE("vjp: zero input gives zero parameters; length is checked") {
    Fixture fx(3, 32, 47, 16);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    const auto out = jac.vjp(std::vector<double>(jac.residual_dim(), 0.0));
    for (double v : out) CHECK(v == 0.0);
    CHECK_THROWS_AS(jac.vjp(std::vector<double>(3, 1.0)), std::invalid_argument);
}

TEST_CASE("adjoint identity <Jv, u> == <v, J^T u>") {
    Fixture fx(5, 32, 48);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    std::mt19937_64 rng(49);
    for (int t = 0; t < 25; ++t) {
        const ParamVector v = random_param_vector(jac.param_dim(), rng);
        const auto ju = random_param_vector(jac.residual_dim(), rng);
        const auto jv = jac.jvp(v);
        const auto jtu = jac.vjp(ju);

        double lhs = 0.0, rhs = 0.0;
        for (size_t i = 0; i < jv.size(); ++i) lhs += jv[i] * ju[i];
        for (size_t i = 0; i < v.size(); ++i) rhs += v[i] * jtu[i];
        CHECK(oracles::rel_error(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("vjp on a single-Gaussian pixel matches the one-term closed form") {
    std::mt19937_64 rng(50);
    GaussianSet scene = oracles::random_scene(1, rng);
    scene.colors = {0.4, 0.2, 0.6};
    const std::vector<Camera> cams = {oracles::test_camera(32, 3.0)};

    const auto out = render::render_full(scene, cams[0]);
    int px = -1, py = -1;
    for (int y = 10; y < 32 && px < 0; ++y)
        for (int x = 10; x < 32 && px < 0; ++x)
            if (out.contrib_count[y * 32 + x] == 1) {
                px = x;
                py = y;
            }
    REQUIRE(px >= 0);

    // plan with exactly that pixel
    sampling::SamplePlan plan;
    plan.samples_per_tile = 1;
    sampling::SampleView view;
    view.camera = 0;
    view.px = {px};
    view.py = {py};
    view.weight = {1.0};
    view.tile = {render::bin_and_sort(scene, cams[0]).tile_of_pixel(px, py)};
    plan.views.push_back(view);

    SampledJacobian jac(scene, cams, plan);
    std::vector<double> u = {1.0, 0.0, 0.0};  // red channel only
    const ParamVector grad = jac.vjp(u);

    // independent derivative via Richardson-extrapolated differences of the
    // one-pixel render
    auto pixel_red = [&](const GaussianSet& g) {
        return render::render_full(g, cams[0]).image.at(px, py, 0);
    };
    for (int j = 0; j < kParamsPerGaussian; ++j) {
        const double h = 1e-5;
        const double d1 = oracles::central_difference(scene, j, h, pixel_red);
        const double d2 = oracles::central_difference(scene, j, h / 2, pixel_red);
        const double fd = (4.0 * d2 - d1) / 3.0;
        if (std::abs(fd) < 1e-10 && std::abs(grad[j]) < 1e-10) continue;
        CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-6));
    }

    // closed forms for the direct channels
    const double alpha_t = 1.0 - out.final_transmittance[py * 32 + px];
    CHECK(grad[kColorOffset] == doctest::Approx(alpha_t * kColorC0).epsilon(1e-12));
    CHECK(grad[kColorOffset + 1] == 0.0);
    CHECK(grad[kColorOffset + 2] == 0.0);
}

TEST_CASE("jtj_diag equals column-squared sums of the explicit Jacobian") {
    Fixture fx(3, 32, 51, 4);  // 64 sampled pixels over 4 tiles
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);

    const auto cols = oracles::explicit_jacobian(jac);
    const auto& w = jac.residual_weights();
    const ParamVector diag = jac.jtj_diag();

    for (size_t j = 0; j < jac.param_dim(); ++j) {
        double expect = 0.0;
        for (size_t i = 0; i < jac.residual_dim(); ++i) expect += w[i] * cols[j][i] * cols[j][i];
        if (expect == 0.0) {
            CHECK(diag[j] == 0.0);
        } else {
            CHECK(oracles::rel_error(diag[j], expect) < 1e-10);
        }
        CHECK(diag[j] >= 0.0);
    }
}

TEST_CASE("jtj_diag: empty plan gives zeros, entries stay non-negative") {
    std::mt19937_64 rng(52);
    const GaussianSet scene = oracles::random_scene(6, rng);
    const std::vector<Camera> cams = {oracles::test_camera(32, 3.0)};
    sampling::SamplePlan empty;
    empty.views.push_back({});  // camera 0, no samples
    SampledJacobian jac(scene, cams, empty);
    for (double v : jac.jtj_diag()) CHECK(v == 0.0);

    Fixture fx(8, 48, 53, 8);
    SampledJacobian jac2(fx.scene, fx.cams, fx.plan);
    for (double v : jac2.jtj_diag()) CHECK(v >= 0.0);
}

TEST_CASE("gn_apply matches the densely materialized operator") {
    Fixture fx(3, 32, 54, 4);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    const auto cols = oracles::explicit_jacobian(jac);
    const auto& w = jac.residual_weights();
    std::mt19937_64 rng(55);

    const double lambda = 0.1;
    for (int t = 0; t < 5; ++t) {
        const ParamVector p = random_param_vector(jac.param_dim(), rng);
        const ParamVector got = jac.gn_apply(lambda, p);

        // dense (J^T W J + lambda I) p
        std::vector<double> jp(jac.residual_dim(), 0.0);
        for (size_t j = 0; j < jac.param_dim(); ++j)
            for (size_t i = 0; i < jp.size(); ++i) jp[i] += cols[j][i] * p[j];
        ParamVector expect(jac.param_dim(), 0.0);
        for (size_t j = 0; j < jac.param_dim(); ++j) {
            double acc = 0.0;
            for (size_t i = 0; i < jp.size(); ++i) acc += cols[j][i] * w[i] * jp[i];
            expect[j] = acc + lambda * p[j];
        }

        double scale = 0.0;
        for (double x : expect) scale = std::max(scale, std::abs(x));
        for (size_t j = 0; j < jac.param_dim(); ++j)
            CHECK(std::abs(got[j] - expect[j]) <= 1e-10 * std::max(scale, 1.0));
    }
}

TEST_CASE("gn_apply is symmetric and positive definite with damping") {
    Fixture fx(5, 32, 56, 8);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    std::mt19937_64 rng(57);
    const double lambda = 0.05;

    const ParamVector zero(jac.param_dim(), 0.0);
    for (double v : jac.gn_apply(lambda, zero)) CHECK(v == 0.0);

    for (int t = 0; t < 10; ++t) {
        const ParamVector p1 = random_param_vector(jac.param_dim(), rng);
        const ParamVector p2 = random_param_vector(jac.param_dim(), rng);
        const ParamVector a1 = jac.gn_apply(lambda, p1);
        const ParamVector a2 = jac.gn_apply(lambda, p2);

        double s12 = 0.0, s21 = 0.0, quad = 0.0, norm = 0.0;
        for (size_t i = 0; i < p1.size(); ++i) {
            s12 += p1[i] * a2[i];
            s21 += p2[i] * a1[i];
            quad += p1[i] * a1[i];
            norm += p1[i] * p1[i];
        }
        CHECK(oracles::rel_error(s12, s21) < 1e-10);
        CHECK(quad >= lambda * norm - 1e-10 * std::max(1.0, quad));
    }
}

TEST_CASE("vjp gradient of the sampled loss agrees with finite differences") {
    // d/dbeta of L_hat = (1/(N M C)) sum w |r|^2 equals (2/(N M C)) J^T W r.
    Fixture fx(3, 32, 58, 16);
    std::mt19937_64 rng(59);
    const Image target = oracles::random_image(32, 32, rng);

    auto sampled_loss = [&](const GaussianSet& g) {
        const Image rendered = render::render_full(g, fx.cams[0]).image;
        const Image resid = render::residuals(rendered, target);
        return sampling::estimate_loss(fx.plan, {&resid, 1});
    };

    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    const Image rendered = render::render_full(fx.scene, fx.cams[0]).image;
    const Image resid = render::residuals(rendered, target);
    const auto& w = jac.residual_weights();

    std::vector<double> u(jac.residual_dim());
    const double m_entries = 3.0 * 32 * 32;
    size_t entry = 0;
    const auto& view = fx.plan.views[0];
    for (size_t s = 0; s < view.size(); ++s)
        for (int c = 0; c < 3; ++c, ++entry)
            u[entry] = 2.0 * w[entry] * resid.at(view.px[s], view.py[s], c) / m_entries;
    const ParamVector grad = jac.vjp(u);

    double max_rel = 0.0;
    for (int j = 0; j < fx.scene.param_count(); ++j) {
        const double fd = oracles::central_difference(fx.scene, j, 1e-6, sampled_loss);
        if (std::abs(grad[j]) < 1e-12 && std::abs(fd) < 1e-7) continue;
        max_rel = std::max(max_rel, oracles::rel_error(grad[j], fd));
    }
    CHECK(max_rel < 1e-4);
}

TEST_CASE("reductions are independent of the worker thread count") {
    Fixture fx(12, 48, 140, 32);
    SampledJacobian jac(fx.scene, fx.cams, fx.plan);
    std::mt19937_64 rng(141);
    const auto u = random_param_vector(jac.residual_dim(), rng);
    const ParamVector p = random_param_vector(jac.param_dim(), rng);

    const int saved = splatlm::thread_count();
    set_thread_count(1);
    const ParamVector vjp1 = jac.vjp(u);
    const ParamVector diag1 = jac.jtj_diag();
    const ParamVector gn1 = jac.gn_apply(0.1, p);
    set_thread_count(4);
    const ParamVector vjp4 = jac.vjp(u);
    const ParamVector diag4 = jac.jtj_diag();
    const ParamVector gn4 = jac.gn_apply(0.1, p);
    set_thread_count(saved);

    CHECK(vjp1 == vjp4);  // bitwise: fixed chunk partition, ordered merge
    CHECK(diag1 == diag4);
    CHECK(gn1 == gn4);
}
