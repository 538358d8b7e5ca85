#include <doctest.h>

#include <cmath>
#include <random>

#include "splatlm/metrics/image_metrics.hpp"
#include "support/oracles.hpp"

using namespace splatlm;

namespace {

// Independent SSIM: direct 2D window sums (the production code filters
// separably), same 11x11 sigma-1.5 window and reflect padding.
double reference_ssim(const Image& a, const Image& b) {
    const int w = a.width, h = a.height;
    double win[11];
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        win[i] = std::exp(-0.5 * d * d / 2.25);
        sum += win[i];
    }
    for (double& v : win) v /= sum;
    auto reflect = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
        return i;
    };

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
                for (int dy = -5; dy <= 5; ++dy) {
                    for (int dx = -5; dx <= 5; ++dx) {
                        const double weight = win[dy + 5] * win[dx + 5];
                        const double va = a.at(reflect(x + dx, w), reflect(y + dy, h), c);
                        const double vb = b.at(reflect(x + dx, w), reflect(y + dy, h), c);
                        mu_a += weight * va;
                        mu_b += weight * vb;
                        aa += weight * va * va;
                        bb += weight * vb * vb;
                        ab += weight * va * vb;
                    }
                }
                const double var_a = aa - mu_a * mu_a, var_b = bb - mu_b * mu_b;
                const double cov = ab - mu_a * mu_b;
                const double c1 = 1e-4, c2 = 9e-4;
                total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                         ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            }
        }
    }
    return total / (3.0 * w * h);
}

}  // namespace

TEST_CASE("psnr anchors and the 100 dB cap") {
    Image a(10, 10), b(10, 10);
    CHECK(metrics::psnr(a, b) == 100.0);  // identical

    // constant squared error 0.01 -> 20 dB
    for (double& v : b.data) v = 0.1;
    CHECK(metrics::psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));

    for (double& v : b.data) v = 0.05;  // mse 0.0025 -> ~26.02 dB
    CHECK(metrics::psnr(a, b) == doctest::Approx(10.0 * std::log10(400.0)).epsilon(1e-12));

    const Image c(10, 11);
    CHECK_THROWS_AS(metrics::psnr(a, c), std::invalid_argument);
}

TEST_CASE("psnr is strictly decreasing in mse") {
    Image a(8, 8);
    double prev = 1e300;
    for (double level : {0.01, 0.02, 0.05, 0.1, 0.3, 0.9}) {
        Image b(8, 8);
        for (double& v : b.data) v = level;
        const double p = metrics::psnr(a, b);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("ssim: identity, symmetry, constant images") {
    std::mt19937_64 rng(81);
    const Image a = oracles::random_image(24, 24, rng);
    CHECK(metrics::ssim(a, a) == 1.0);

    const Image b = oracles::random_image(24, 24, rng);
    CHECK(metrics::ssim(a, b) == doctest::Approx(metrics::ssim(b, a)).epsilon(1e-12));

    Image c(16, 16), d(16, 16);
    for (double& v : c.data) v = 0.5;
    for (double& v : d.data) v = 0.5;  // "negative" of a constant 0.5 image is itself
    CHECK(metrics::ssim(c, d) == doctest::Approx(1.0));
}

TEST_CASE("ssim matches an independent direct-window reference") {
    // checkerboard vs inverted checkerboard
    Image a(20, 20), b(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x)
            for (int c = 0; c < 3; ++c) {
                const double v = (x + y) % 2 ? 1.0 : 0.0;
                a.at(x, y, c) = v;
                b.at(x, y, c) = 1.0 - v;
            }
    CHECK(metrics::ssim(a, b) == doctest::Approx(reference_ssim(a, b)).epsilon(1e-6));

    std::mt19937_64 rng(82);
    const Image r1 = oracles::random_image(17, 23, rng);  // non-square, border-heavy
    const Image r2 = oracles::random_image(17, 23, rng);
    CHECK(metrics::ssim(r1, r2) == doctest::Approx(reference_ssim(r1, r2)).epsilon(1e-6));
}

TEST_CASE("ssim_diag_residuals: identical images give zero residuals/derivatives") {
    std::mt19937_64 rng(83);
    const Image a = oracles::random_image(16, 16, rng);
    const auto sd = metrics::ssim_diag_residuals(a, a);
    for (double v : sd.residual.data) CHECK(v == 0.0);
    for (double v : sd.d_center.data) CHECK(v == 0.0);
}

TEST_CASE("ssim_diag_residuals derivative matches a center-pixel finite difference") {
    std::mt19937_64 rng(84);
    Image a = oracles::random_image(18, 14, rng);
    const Image b = oracles::random_image(18, 14, rng);
    const auto sd = metrics::ssim_diag_residuals(a, b);

    const double eps = 1e-7;
    int checked = 0;
    for (int y = 0; y < 14; y += 3) {
        for (int x = 0; x < 18; x += 3) {
            for (int c = 0; c < 3; ++c) {
                const double got = sd.d_center.at(x, y, c);
                const double saved = a.at(x, y, c);
                a.at(x, y, c) = saved + eps;
                const double sp = metrics::ssim_diag_residuals(a, b).residual.at(x, y, c);
                a.at(x, y, c) = saved - eps;
                const double sm = metrics::ssim_diag_residuals(a, b).residual.at(x, y, c);
                a.at(x, y, c) = saved;
                const double fd = (sp - sm) / (2 * eps);
                if (std::abs(fd) < 1e-9 && std::abs(got) < 1e-9) continue;
                CHECK(got == doctest::Approx(fd).epsilon(1e-4));
                ++checked;
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("sum of squared ssim residuals recovers 1 - mean local ssim") {
    std::mt19937_64 rng(85);
    const Image a = oracles::random_image(20, 20, rng);
    const Image b = oracles::random_image(20, 20, rng);
    const auto sd = metrics::ssim_diag_residuals(a, b);
    double ssq = 0.0;
    for (double v : sd.residual.data) ssq += v * v;
    ssq /= static_cast<double>(sd.residual.data.size());
    CHECK(ssq == doctest::Approx(1.0 - metrics::ssim(a, b)).epsilon(1e-9));
}

TEST_CASE("evaluate bundles mse/psnr/ssim consistently") {
    std::mt19937_64 rng(86);
    const Image a = oracles::random_image(16, 16, rng);
    const Image b = oracles::random_image(16, 16, rng);
    const auto r = metrics::evaluate(a, b);
    CHECK(r.mse == doctest::Approx(metrics::mse(a, b)));
    CHECK(r.psnr == doctest::Approx(metrics::psnr(a, b)));
    CHECK(r.ssim == doctest::Approx(metrics::ssim(a, b)));
    CHECK(r.ssim >= -1.0);
    CHECK(r.ssim <= 1.0);
}
