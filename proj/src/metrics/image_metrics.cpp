#include "splatlm/metrics/image_metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "splatlm/kernels/vec_kernels.hpp"

namespace splatlm::metrics {

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (k1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

void check_shapes(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("metrics: image shapes differ");
}

std::array<double, kWindow> gaussian_window() {
    std::array<double, kWindow> w{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kHalf;
        w[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

inline int reflect(int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
    return i;
}

// Separable Gaussian filter with reflect padding, one channel.
void filter_channel(const std::vector<double>& src, int w, int h, std::vector<double>& tmp,
                    std::vector<double>& dst) {
    static const std::array<double, kWindow> win = gaussian_window();
    tmp.resize(src.size());
    dst.resize(src.size());
    for (int y = 0; y < h; ++y) {
        const double* row = src.data() + static_cast<size_t>(y) * w;
        double* out = tmp.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -kHalf; k <= kHalf; ++k) acc += win[k + kHalf] * row[reflect(x + k, w)];
            out[x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        double* out = dst.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -kHalf; k <= kHalf; ++k)
                acc += win[k + kHalf] * tmp[static_cast<size_t>(reflect(y + k, h)) * w + x];
            out[x] = acc;
        }
    }
}

// Effective window weight each pixel contributes to its own window; with
// reflect padding a border pixel appears at several window offsets.
std::vector<double> effective_center_weights(int n) {
    static const std::array<double, kWindow> win = gaussian_window();
    std::vector<double> w(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = -kHalf; k <= kHalf; ++k)
            if (reflect(i + k, n) == i) w[i] += win[k + kHalf];
    return w;
}

struct SsimStats {
    // Filtered moments per channel, image-sized planes.
    std::vector<double> mu_a, mu_b, e_aa, e_bb, e_ab;
};

SsimStats ssim_stats(const Image& a, const Image& b, int channel) {
    const int w = a.width, h = a.height;
    const size_t n = static_cast<size_t>(w) * h;
    std::vector<double> pa(n), pb(n), prod(n);
    for (size_t i = 0; i < n; ++i) {
        pa[i] = a.data[3 * i + channel];
        pb[i] = b.data[3 * i + channel];
        prod[i] = pa[i] * pb[i];
    }
    SsimStats s;
    std::vector<double> tmp, sq(n);
    filter_channel(pa, w, h, tmp, s.mu_a);
    filter_channel(pb, w, h, tmp, s.mu_b);
    for (size_t i = 0; i < n; ++i) sq[i] = pa[i] * pa[i];
    filter_channel(sq, w, h, tmp, s.e_aa);
    for (size_t i = 0; i < n; ++i) sq[i] = pb[i] * pb[i];
    filter_channel(sq, w, h, tmp, s.e_bb);
    filter_channel(prod, w, h, tmp, s.e_ab);
    return s;
}

}  // namespace

double mse(const Image& a, const Image& b) {
    check_shapes(a, b);
    if (a.data.empty()) return 0.0;
    return kernels::sum_squared_diff(a.data.data(), b.data.data(), a.data.size()) /
           static_cast<double>(a.data.size());
}

double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m < 1e-10) return 100.0;
    return 10.0 * std::log10(1.0 / m);
}

double ssim(const Image& a, const Image& b) {
    check_shapes(a, b);
    const size_t n = a.pixel_count();
    if (n == 0) return 1.0;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const SsimStats s = ssim_stats(a, b, c);
        for (size_t i = 0; i < n; ++i) {
            const double mu_a = s.mu_a[i], mu_b = s.mu_b[i];
            const double var_a = s.e_aa[i] - mu_a * mu_a;
            const double var_b = s.e_bb[i] - mu_b * mu_b;
            const double cov = s.e_ab[i] - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
            const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
            total += num / den;
        }
    }
    return total / (3.0 * static_cast<double>(n));
}

SsimDiagResiduals ssim_diag_residuals(const Image& a, const Image& b) {
    check_shapes(a, b);
    const int w = a.width, h = a.height;
    const size_t n = a.pixel_count();
    SsimDiagResiduals out;
    out.residual = Image(w, h);
    out.d_center = Image(w, h);

    const std::vector<double> wx = effective_center_weights(w);
    const std::vector<double> wy = effective_center_weights(h);

    for (int c = 0; c < 3; ++c) {
        const SsimStats s = ssim_stats(a, b, c);
        for (size_t i = 0; i < n; ++i) {
            const double mu_a = s.mu_a[i], mu_b = s.mu_b[i];
            const double var_a = s.e_aa[i] - mu_a * mu_a;
            const double var_b = s.e_bb[i] - mu_b * mu_b;
            const double cov = s.e_ab[i] - mu_a * mu_b;
            const double a1 = 2.0 * mu_a * mu_b + kC1;
            const double a2 = 2.0 * cov + kC2;
            const double b1 = mu_a * mu_a + mu_b * mu_b + kC1;
            const double b2 = var_a + var_b + kC2;
            const double local = (a1 * a2) / (b1 * b2);

            const double sval = std::sqrt(std::max(0.0, 1.0 - local));
            out.residual.data[3 * i + c] = sval;
            if (sval < 1e-12) continue;  // derivative defined 0 where SSIM == 1

            const double av = a.data[3 * i + c], bv = b.data[3 * i + c];
            const double wc = wx[i % w] * wy[i / w];
            const double dnum = mu_b * a2 + a1 * (bv - mu_b);
            const double dden = mu_a * b2 + b1 * (av - mu_a);
            const double dlocal = 2.0 * wc * (dnum * b1 * b2 - a1 * a2 * dden) / (b1 * b2 * b1 * b2);
            out.d_center.data[3 * i + c] = -dlocal / (2.0 * sval);
        }
    }
    return out;
}

MetricReport evaluate(const Image& rendered, const Image& ground_truth) {
    MetricReport r;
    r.mse = mse(rendered, ground_truth);
    r.psnr = r.mse < 1e-10 ? 100.0 : 10.0 * std::log10(1.0 / r.mse);
    r.ssim = ssim(rendered, ground_truth);
    return r;
}

}  // namespace splatlm::metrics
