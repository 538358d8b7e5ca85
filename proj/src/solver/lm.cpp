#include "splatlm/solver/lm.hpp"

#include <cmath>
#include <stdexcept>

#include "splatlm/autodiff/jacobian.hpp"
#include "splatlm/metrics/image_metrics.hpp"
#include "splatlm/sampling/view_sampler.hpp"
#include "splatlm/solver/pcg.hpp"

namespace splatlm::solver {

LmConfig LmConfig::real_world_preset() {
    LmConfig cfg;
    cfg.pcg_iters_initial = 5;
    cfg.batch_size_initial = 16;
    cfg.batch_size_late = 32;
    return cfg;
}

void TrainData::rebuild_clusters(int k, std::uint64_t seed) {
    const auto feats = sampling::camera_features(cameras);
    clusters = sampling::kmeans_cameras(feats, k, seed);
}

double learning_rate(const ParamVector& delta, int iteration, const LmConfig& cfg) {
    if (delta.size() % kParamsPerGaussian != 0)
        throw std::invalid_argument("learning_rate: bad update length");
    if (iteration < cfg.warmup_iterations) return cfg.warmup_lr;

    double m = 0.0;
    for (size_t base = 0; base < delta.size(); base += kParamsPerGaussian)
        for (int c = 0; c < 3; ++c) m = std::max(m, std::abs(delta[base + kColorOffset + c]));

    if (m > 1.0) return std::min(cfg.lr_cap, 1.0 / m);
    return std::min(cfg.lr_cap, 1.0);
}

double batch_loss(const GaussianSet& state, std::span<const Camera> cams,
                  std::span<const Image> gts, LossKind loss, double ssim_weight) {
    double acc = 0.0;
    for (size_t i = 0; i < cams.size(); ++i) {
        const Image rendered = render::render_full(state, cams[i]).image;
        double term = metrics::mse(rendered, gts[i]);
        if (loss == LossKind::kMseSsim) {
            const auto sd = metrics::ssim_diag_residuals(rendered, gts[i]);
            double ssq = 0.0;
            for (double s : sd.residual.data) ssq += s * s;
            term += ssim_weight * ssq / static_cast<double>(sd.residual.data.size());
        }
        acc += term;
    }
    return cams.empty() ? 0.0 : acc / static_cast<double>(cams.size());
}

StepReport lm_step(GaussianSet& state, const TrainData& data, const LmConfig& cfg, int iteration,
                   std::mt19937_64& rng) {
    if (data.clusters.empty()) throw std::invalid_argument("lm_step: no view clusters");
    StepReport report;
    report.iteration = iteration;

    // 1. view batch: one camera per cluster
    report.batch = sampling::sample_view_batch(data.clusters, rng);
    std::vector<Camera> cams;
    std::vector<const Image*> gts;
    for (int idx : report.batch) {
        cams.push_back(data.cameras[idx]);
        gts.push_back(&data.images[idx]);
    }

    // 2./3. forward render and residuals
    std::vector<render::RenderOutput> renders;
    std::vector<Image> residual_fields;
    renders.reserve(cams.size());
    for (size_t i = 0; i < cams.size(); ++i) {
        renders.push_back(render::render_full(state, cams[i]));
        residual_fields.push_back(render::residuals(renders.back().image, *gts[i]));
    }

    // 4. stratified sample plan
    std::vector<sampling::PlanAux> aux(cams.size());
    for (size_t i = 0; i < cams.size(); ++i) aux[i] = {&renders[i], gts[i]};
    const sampling::SamplePlan plan = sampling::build_sample_plan(
        cams, cfg.samples_per_tile, cfg.dist, aux, rng, cfg.sample_lane_width);

    autodiff::SampledJacobian jac(state, cams, plan);

    // Residual-space vector for the right-hand side. The sign makes the
    // solution a descent direction under r = rendered - truth. With the
    // diagonal SSIM term active, the extra rows are scalar multiples of the
    // pixel rows, so they fold into per-channel weights.
    std::vector<metrics::SsimDiagResiduals> ssim_fields;
    if (cfg.loss == LossKind::kMseSsim) {
        ssim_fields.reserve(cams.size());
        for (size_t i = 0; i < cams.size(); ++i)
            ssim_fields.push_back(metrics::ssim_diag_residuals(renders[i].image, *gts[i]));
    }

    const std::vector<double>& base_w = jac.residual_weights();
    std::vector<double> rhs(jac.residual_dim());
    std::vector<double> weights = base_w;
    size_t entry = 0;
    for (size_t vi = 0; vi < plan.views.size(); ++vi) {
        const auto& view = plan.views[vi];
        for (size_t s = 0; s < view.size(); ++s) {
            for (int c = 0; c < 3; ++c, ++entry) {
                const double r = residual_fields[vi].at(view.px[s], view.py[s], c);
                double u = r;
                if (cfg.loss == LossKind::kMseSsim) {
                    const double sv = ssim_fields[vi].residual.at(view.px[s], view.py[s], c);
                    const double sp = ssim_fields[vi].d_center.at(view.px[s], view.py[s], c);
                    u += cfg.ssim_weight * sp * sv;
                    weights[entry] = base_w[entry] * (1.0 + cfg.ssim_weight * sp * sp);
                }
                rhs[entry] = -base_w[entry] * u;
            }
        }
    }
    if (cfg.loss == LossKind::kMseSsim) jac.set_residual_weights(std::move(weights));

    ParamVector b = jac.vjp(rhs);

    // 5./6. Jacobi preconditioner from the sampled Gauss-Newton diagonal
    ParamVector minv = jac.jtj_diag();
    for (double& v : minv) v = 1.0 / (v + cfg.damping);

    // 7. matrix-free PCG on the damped normal equation
    const PcgResult pcg = pcg_solve(
        [&](const ParamVector& p, ParamVector& out) { jac.gn_apply(cfg.damping, p, out); }, b,
        minv, cfg.pcg_iters_at(iteration));
    report.pcg_iterations = pcg.iterations;
    report.breakdown = pcg.breakdown;

    // 8./9./10. learning rate, update, re-normalization
    report.eta = learning_rate(pcg.x, iteration, cfg);
    if (pcg.breakdown) report.eta *= 0.5;  // conservative recovery
    state.apply_update(pcg.x, report.eta);

    // loss bookkeeping on the batch (full images)
    std::vector<Image> gt_copy;
    gt_copy.reserve(gts.size());
    for (const Image* g : gts) gt_copy.push_back(*g);
    double before = 0.0;
    for (size_t i = 0; i < cams.size(); ++i) before += metrics::mse(renders[i].image, gt_copy[i]);
    if (cfg.loss == LossKind::kMseSsim) {
        for (size_t i = 0; i < cams.size(); ++i) {
            double ssq = 0.0;
            for (double s : ssim_fields[i].residual.data) ssq += s * s;
            before += cfg.ssim_weight * ssq / static_cast<double>(ssim_fields[i].residual.data.size());
        }
    }
    report.loss_before = before / static_cast<double>(cams.size());
    report.loss_after = batch_loss(state, cams, gt_copy, cfg.loss, cfg.ssim_weight);
    if (!std::isfinite(report.loss_after))
        throw std::runtime_error("lm_step: non-finite loss after update");
    return report;
}

}  // namespace splatlm::solver
