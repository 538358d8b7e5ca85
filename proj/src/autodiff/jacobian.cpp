#include "splatlm/autodiff/jacobian.hpp"

#include <cassert>
#include <stdexcept>

#include "splatlm/core/parallel.hpp"
#include "splatlm/kernels/vec_kernels.hpp"

namespace splatlm::autodiff {

using render::CameraContext;
using render::params_of;
using render::GaussianParams;
using render::PreparedSplat;
using render::SplatD;

namespace {

// Fixed chunk count for ordered reductions: results are independent of the
// worker thread count and bitwise reproducible across runs.
constexpr int kAccumChunks = 16;

// Per-pixel record of one blended splat: alpha after clamping, the
// transmittance in front of it, and whether the clamp froze its derivative.
struct BlendRecord {
    int idx;
    double alpha;
    double trans;
    bool clamped;
};

// Forward replay of render::blend_pixel that keeps the per-splat state the
// backward sweep needs. Gating must match blend_pixel exactly.
int replay_forward(const SplatD* splats, std::span<const int> order, double px, double py,
                   std::vector<BlendRecord>& rec) {
    rec.clear();
    double transmittance = 1.0;
    for (int idx : order) {
        const SplatD& s = splats[idx];
        const double dx = s.mean2d.x - px;
        const double dy = s.mean2d.y - py;
        const double power =
            -0.5 * (s.conic_a * dx * dx + s.conic_c * dy * dy) - s.conic_b * dx * dy;
        if (power > 0.0) continue;

        double alpha = s.opacity * std::exp(power);
        bool clamped = false;
        if (alpha > render::kAlphaClamp) {
            alpha = render::kAlphaClamp;
            clamped = true;
        }
        if (alpha < render::kAlphaSkip) continue;

        const double test_t = transmittance * (1.0 - alpha);
        if (test_t < render::kTransmittanceFloor) break;

        rec.push_back({idx, alpha, transmittance, clamped});
        transmittance = test_t;
    }
    return static_cast<int>(rec.size());
}

// Intermediate gradient layout per Gaussian:
// [mean2d.x, mean2d.y, conic_a, conic_b, conic_c, opacity, color rgb].
constexpr int kInterStride = 9;

void backward_pixel_vjp(const SplatD* splats, const std::vector<BlendRecord>& rec, double px,
                        double py, const double u[3], double* inter) {
    double suffix[3] = {0.0, 0.0, 0.0};
    for (int k = static_cast<int>(rec.size()) - 1; k >= 0; --k) {
        const BlendRecord& r = rec[k];
        const SplatD& s = splats[r.idx];
        double* gi = inter + static_cast<size_t>(kInterStride) * r.idx;

        const double w = r.alpha * r.trans;
        double dalpha = 0.0;
        for (int c = 0; c < 3; ++c) {
            gi[6 + c] += u[c] * w;
            dalpha += u[c] * (r.trans * s.color[c] - suffix[c] / (1.0 - r.alpha));
            suffix[c] += w * s.color[c];
        }
        if (r.clamped) continue;

        const double dpower = dalpha * r.alpha;
        const double dx = s.mean2d.x - px;
        const double dy = s.mean2d.y - py;
        gi[0] += dpower * -(s.conic_a * dx + s.conic_b * dy);
        gi[1] += dpower * -(s.conic_b * dx + s.conic_c * dy);
        gi[2] += dpower * (-0.5 * dx * dx);
        gi[3] += dpower * (-dx * dy);
        gi[4] += dpower * (-0.5 * dy * dy);
        gi[5] += dalpha * (r.alpha / s.opacity);
    }
}

}  // namespace

SampledJacobian::SampledJacobian(const GaussianSet& gaussians, std::span<const Camera> cams,
                                 const sampling::SamplePlan& plan)
    : gaussians_(gaussians), cams_(cams.begin(), cams.end()), plan_(plan) {
    contexts_.reserve(plan_.views.size());
    view_offsets_.reserve(plan_.views.size());
    std::size_t offset = 0;
    for (const auto& view : plan_.views) {
        if (view.camera < 0 || view.camera >= static_cast<int>(cams_.size()))
            throw std::invalid_argument("sample plan references a camera outside the batch");
        contexts_.push_back(render::prepare_camera(gaussians_, cams_[view.camera]));
        view_offsets_.push_back(offset);
        offset += view.size();
    }

    const double inv_total = plan_.total_samples() > 0 ? 1.0 / plan_.total_samples() : 0.0;
    weights_.reserve(3 * plan_.total_samples());
    for (const auto& view : plan_.views)
        for (double w : view.weight)
            for (int c = 0; c < 3; ++c) weights_.push_back(w * inv_total);

    build_chains();
}

void SampledJacobian::set_residual_weights(std::vector<double> w) {
    if (w.size() != residual_dim())
        throw std::invalid_argument("residual weight vector has wrong length");
    weights_ = std::move(w);
}

void SampledJacobian::build_chains() {
    chains_.resize(contexts_.size());
    for (std::size_t v = 0; v < contexts_.size(); ++v) {
        auto& chain = chains_[v];
        chain.resize(gaussians_.count);
        const Camera& cam = cams_[plan_.views[v].camera];
        const CameraContext& ctx = contexts_[v];
        parallel_for(gaussians_.count, [&](std::size_t g) {
            ProjChain& pc = chain[g];
            const SplatD& s = ctx.splats[g];
            pc.valid = s.valid;
            if (!s.valid) return;

            const GaussianParams<double> base = params_of(gaussians_, static_cast<int>(g));
            for (int j = 0; j < 10; ++j) {
                GaussianParams<Dual> dp;
                dp.mean = {Dual(base.mean.x, j == 0), Dual(base.mean.y, j == 1),
                           Dual(base.mean.z, j == 2)};
                dp.log_scale = {Dual(base.log_scale.x, j == 3), Dual(base.log_scale.y, j == 4),
                                Dual(base.log_scale.z, j == 5)};
                dp.rotation = {Dual(base.rotation.w, j == 6), Dual(base.rotation.x, j == 7),
                               Dual(base.rotation.y, j == 8), Dual(base.rotation.z, j == 9)};
                dp.opacity_logit = Dual(base.opacity_logit);
                for (int c = 0; c < 3; ++c) dp.color[c] = Dual(base.color[c]);

                const PreparedSplat<Dual> ds = render::prepare_splat(dp, cam);
                pc.p[0][j] = ds.mean2d.x.pr;
                pc.p[1][j] = ds.mean2d.y.pr;
                pc.p[2][j] = ds.conic_a.pr;
                pc.p[3][j] = ds.conic_b.pr;
                pc.p[4][j] = ds.conic_c.pr;
            }
            const double o = s.opacity;
            pc.dopacity_dlogit = o * (1.0 - o);
            for (int c = 0; c < 3; ++c)
                pc.dcolor_dcoeff[c] = s.color[c] > 0.0 ? kColorC0 : 0.0;
        });
    }
}

std::vector<PreparedSplat<Dual>> SampledJacobian::dual_splats(int view,
                                                              const ParamVector& v) const {
    const Camera& cam = cams_[plan_.views[view].camera];
    std::vector<PreparedSplat<Dual>> splats(gaussians_.count);
    parallel_for(gaussians_.count, [&](std::size_t g) {
        const double* t = v.data() + g * kParamsPerGaussian;
        const GaussianParams<double> base = params_of(gaussians_, static_cast<int>(g));
        GaussianParams<Dual> dp;
        dp.mean = {Dual(base.mean.x, t[kMeanOffset]), Dual(base.mean.y, t[kMeanOffset + 1]),
                   Dual(base.mean.z, t[kMeanOffset + 2])};
        dp.log_scale = {Dual(base.log_scale.x, t[kLogScaleOffset]),
                        Dual(base.log_scale.y, t[kLogScaleOffset + 1]),
                        Dual(base.log_scale.z, t[kLogScaleOffset + 2])};
        dp.rotation = {Dual(base.rotation.w, t[kRotationOffset]),
                       Dual(base.rotation.x, t[kRotationOffset + 1]),
                       Dual(base.rotation.y, t[kRotationOffset + 2]),
                       Dual(base.rotation.z, t[kRotationOffset + 3])};
        dp.opacity_logit = Dual(base.opacity_logit, t[kOpacityOffset]);
        for (int c = 0; c < 3; ++c) dp.color[c] = Dual(base.color[c], t[kColorOffset + c]);
        splats[g] = render::prepare_splat(dp, cam);
    });
    return splats;
}

void SampledJacobian::jvp(const ParamVector& v, std::span<double> out) const {
    if (v.size() != param_dim()) throw std::invalid_argument("jvp: probe vector length mismatch");
    if (out.size() != residual_dim()) throw std::invalid_argument("jvp: output length mismatch");

    for (std::size_t vi = 0; vi < plan_.views.size(); ++vi) {
        const auto& sv = plan_.views[vi];
        const CameraContext& ctx = contexts_[vi];
        const auto duals = dual_splats(static_cast<int>(vi), v);
        double* out_base = out.data() + 3 * view_offsets_[vi];

        parallel_for(sv.size(), [&](std::size_t s) {
            const std::vector<int>& order = ctx.grid.lists[sv.tile[s]];
            Dual rgb[3];
            Dual transmittance;
            int contrib;
            render::blend_pixel(duals.data(), std::span<const int>(order), sv.px[s] + 0.5,
                                sv.py[s] + 0.5, rgb, transmittance, contrib);
            for (int c = 0; c < 3; ++c) out_base[3 * s + c] = rgb[c].pr;
        });
    }
}

std::vector<double> SampledJacobian::jvp(const ParamVector& v) const {
    std::vector<double> out(residual_dim());
    jvp(v, out);
    return out;
}

void SampledJacobian::vjp(std::span<const double> u, ParamVector& out) const {
    if (u.size() != residual_dim()) throw std::invalid_argument("vjp: input length mismatch");
    out.assign(param_dim(), 0.0);

    const std::size_t inter_size = static_cast<std::size_t>(gaussians_.count) * kInterStride;
    std::vector<double> inter(inter_size);
    std::vector<double> chunk_inter(inter_size * kAccumChunks);

    for (std::size_t vi = 0; vi < plan_.views.size(); ++vi) {
        const auto& sv = plan_.views[vi];
        const CameraContext& ctx = contexts_[vi];
        const double* u_base = u.data() + 3 * view_offsets_[vi];

        std::fill(inter.begin(), inter.end(), 0.0);
        std::fill(chunk_inter.begin(), chunk_inter.end(), 0.0);

        parallel_chunks(sv.size(), kAccumChunks, [&](int chunk, std::size_t lo, std::size_t hi) {
            double* local = chunk_inter.data() + inter_size * chunk;
            std::vector<BlendRecord> rec;
            for (std::size_t s = lo; s < hi; ++s) {
                const std::vector<int>& order = ctx.grid.lists[sv.tile[s]];
                const double px = sv.px[s] + 0.5, py = sv.py[s] + 0.5;
                replay_forward(ctx.splats.data(), order, px, py, rec);
                backward_pixel_vjp(ctx.splats.data(), rec, px, py, u_base + 3 * s, local);
            }
        });
        // Ordered merge keeps the accumulation independent of thread count.
        for (int chunk = 0; chunk < kAccumChunks; ++chunk)
            kernels::axpy(1.0, chunk_inter.data() + inter_size * chunk, inter.data(), inter_size);

        const auto& chain = chains_[vi];
        parallel_for(gaussians_.count, [&](std::size_t g) {
            const ProjChain& pc = chain[g];
            if (!pc.valid) return;
            const double* gi = inter.data() + kInterStride * g;
            double* ob = out.data() + kParamsPerGaussian * g;
            for (int j = 0; j < 10; ++j) {
                double acc = 0.0;
                for (int i = 0; i < 5; ++i) acc += pc.p[i][j] * gi[i];
                ob[j] += acc;
            }
            ob[kOpacityOffset] += gi[5] * pc.dopacity_dlogit;
            for (int c = 0; c < 3; ++c) ob[kColorOffset + c] += gi[6 + c] * pc.dcolor_dcoeff[c];
        });
    }
}

ParamVector SampledJacobian::vjp(std::span<const double> u) const {
    ParamVector out;
    vjp(u, out);
    return out;
}

ParamVector SampledJacobian::jtj_diag() const {
    const std::size_t p = param_dim();
    ParamVector diag(p, 0.0);
    std::vector<double> chunk_diag(p * kAccumChunks);

    for (std::size_t vi = 0; vi < plan_.views.size(); ++vi) {
        const auto& sv = plan_.views[vi];
        const CameraContext& ctx = contexts_[vi];
        const auto& chain = chains_[vi];
        const double* w_base = weights_.data() + 3 * view_offsets_[vi];

        std::fill(chunk_diag.begin(), chunk_diag.end(), 0.0);
        parallel_chunks(sv.size(), kAccumChunks, [&](int chunk, std::size_t lo, std::size_t hi) {
            double* local = chunk_diag.data() + p * chunk;
            std::vector<BlendRecord> rec;
            for (std::size_t s = lo; s < hi; ++s) {
                const std::vector<int>& order = ctx.grid.lists[sv.tile[s]];
                const double px = sv.px[s] + 0.5, py = sv.py[s] + 0.5;
                replay_forward(ctx.splats.data(), order, px, py, rec);
                const double* we = w_base + 3 * s;

                double suffix[3] = {0.0, 0.0, 0.0};
                for (int k = static_cast<int>(rec.size()) - 1; k >= 0; --k) {
                    const BlendRecord& r = rec[k];
                    const SplatD& splat = ctx.splats[r.idx];
                    const ProjChain& pc = chain[r.idx];
                    double* d = local + static_cast<std::size_t>(kParamsPerGaussian) * r.idx;

                    const double w = r.alpha * r.trans;
                    double dalpha_c[3];
                    for (int c = 0; c < 3; ++c) {
                        dalpha_c[c] = r.trans * splat.color[c] - suffix[c] / (1.0 - r.alpha);
                        suffix[c] += w * splat.color[c];
                        // direct color row: dr_c/dcoeff_c = alpha * T * C0 (gated)
                        const double e = w * pc.dcolor_dcoeff[c];
                        d[kColorOffset + c] += we[c] * e * e;
                    }
                    if (r.clamped) continue;

                    const double dx = splat.mean2d.x - px;
                    const double dy = splat.mean2d.y - py;
                    const double gpow[5] = {-(splat.conic_a * dx + splat.conic_b * dy),
                                            -(splat.conic_b * dx + splat.conic_c * dy),
                                            -0.5 * dx * dx, -dx * dy, -0.5 * dy * dy};
                    for (int c = 0; c < 3; ++c) {
                        if (we[c] == 0.0) continue;
                        const double dp = dalpha_c[c] * r.alpha;  // dr_c / dpower
                        double q[5];
                        for (int i = 0; i < 5; ++i) q[i] = dp * gpow[i];
                        for (int j = 0; j < 10; ++j) {
                            double row = 0.0;
                            for (int i = 0; i < 5; ++i) row += q[i] * pc.p[i][j];
                            d[j] += we[c] * row * row;
                        }
                        const double eo =
                            dalpha_c[c] * (r.alpha / splat.opacity) * pc.dopacity_dlogit;
                        d[kOpacityOffset] += we[c] * eo * eo;
                    }
                }
            }
        });
        for (int chunk = 0; chunk < kAccumChunks; ++chunk)
            kernels::axpy(1.0, chunk_diag.data() + p * chunk, diag.data(), p);
    }
    return diag;
}

void SampledJacobian::gn_apply(double lambda, const ParamVector& p, ParamVector& out) const {
    std::vector<double> tmp = jvp(p);
    kernels::hadamard(tmp.data(), weights_.data(), tmp.data(), tmp.size());
    vjp(tmp, out);
    kernels::axpy(lambda, p.data(), out.data(), out.size());
}

ParamVector SampledJacobian::gn_apply(double lambda, const ParamVector& p) const {
    ParamVector out;
    gn_apply(lambda, p, out);
    return out;
}

std::vector<double> jvp(const GaussianSet& g, std::span<const Camera> cams,
                        const sampling::SamplePlan& plan, const ParamVector& v) {
    return SampledJacobian(g, cams, plan).jvp(v);
}

ParamVector vjp(const GaussianSet& g, std::span<const Camera> cams,
                const sampling::SamplePlan& plan, std::span<const double> u) {
    return SampledJacobian(g, cams, plan).vjp(u);
}

ParamVector jtj_diag(const GaussianSet& g, std::span<const Camera> cams,
                     const sampling::SamplePlan& plan) {
    return SampledJacobian(g, cams, plan).jtj_diag();
}

ParamVector gn_apply(const GaussianSet& g, std::span<const Camera> cams,
                     const sampling::SamplePlan& plan, double lambda, const ParamVector& p) {
    return SampledJacobian(g, cams, plan).gn_apply(lambda, p);
}

}  // namespace splatlm::autodiff
