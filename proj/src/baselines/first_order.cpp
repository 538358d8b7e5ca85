#include "splatlm/baselines/first_order.hpp"

#include <cmath>
#include <stdexcept>

#include "splatlm/autodiff/jacobian.hpp"
#include "splatlm/metrics/image_metrics.hpp"

namespace splatlm::baselines {

ParamVector full_gradient(const GaussianSet& state, std::span<const Camera> cams,
                          std::span<const Image> gts, solver::LossKind loss, double ssim_weight) {
    if (cams.size() != gts.size())
        throw std::invalid_argument("full_gradient: camera/image count mismatch");

    const sampling::SamplePlan plan = sampling::exhaustive_plan(cams);
    autodiff::SampledJacobian jac(state, cams, plan);

    // dL/dr for L = (1/M) sum r^2 (+ w/M sum s^2 under the diagonal SSIM
    // term) is 2/M (r + w s s') at every pixel channel.
    double entries = 0.0;
    for (const auto& cam : cams) entries += 3.0 * cam.width * cam.height;
    const double scale = 2.0 / entries;

    std::vector<double> u(jac.residual_dim());
    size_t entry = 0;
    for (size_t vi = 0; vi < plan.views.size(); ++vi) {
        const Image rendered = render::render_full(state, cams[vi]).image;
        const Image resid = render::residuals(rendered, gts[vi]);
        metrics::SsimDiagResiduals sd;
        if (loss == solver::LossKind::kMseSsim) sd = metrics::ssim_diag_residuals(rendered, gts[vi]);

        const auto& view = plan.views[vi];
        for (size_t s = 0; s < view.size(); ++s) {
            for (int c = 0; c < 3; ++c, ++entry) {
                double v = resid.at(view.px[s], view.py[s], c);
                if (loss == solver::LossKind::kMseSsim)
                    v += ssim_weight * sd.d_center.at(view.px[s], view.py[s], c) *
                         sd.residual.at(view.px[s], view.py[s], c);
                u[entry] = scale * v;
            }
        }
    }
    return jac.vjp(u);
}

double group_lr(const GroupLrs& lrs, int index_in_block) {
    if (index_in_block < kLogScaleOffset) return lrs.mean;
    if (index_in_block < kRotationOffset) return lrs.scale;
    if (index_in_block < kOpacityOffset) return lrs.rotation;
    if (index_in_block == kOpacityOffset) return lrs.opacity;
    return lrs.color;
}

namespace {

double mean_lr_factor(const FirstOrderConfig& cfg, long step) {
    if (cfg.decay_iterations <= 0) return 1.0;
    const double t = std::min(1.0, static_cast<double>(step) / cfg.decay_iterations);
    return std::pow(cfg.mean_lr_final_factor, t);
}

// Applies `update(j, lr, g)` over all parameters with the per-group rate.
template <class Fn>
void for_each_param(GaussianSet& state, const ParamVector& grad, const FirstOrderConfig& cfg,
                    long step, Fn&& update) {
    if (grad.size() != static_cast<size_t>(state.param_count()))
        throw std::invalid_argument("gradient length mismatch");
    const double mean_factor = mean_lr_factor(cfg, step);
    ParamVector params = state.pack();
    for (size_t j = 0; j < params.size(); ++j) {
        const int in_block = static_cast<int>(j % kParamsPerGaussian);
        double lr = group_lr(cfg.lrs, in_block);
        if (in_block < kLogScaleOffset) lr *= mean_factor;
        update(j, lr, params[j]);
    }
    state = GaussianSet::unpack(params);
    state.renormalize_rotations();
}

}  // namespace

void adam_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
               const FirstOrderConfig& cfg) {
    ++st.step;
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(st.step));
    for_each_param(state, grad, cfg, st.step - 1, [&](size_t j, double lr, double& p) {
        st.m1[j] = cfg.adam_beta1 * st.m1[j] + (1.0 - cfg.adam_beta1) * grad[j];
        st.m2[j] = cfg.adam_beta2 * st.m2[j] + (1.0 - cfg.adam_beta2) * grad[j] * grad[j];
        const double mhat = st.m1[j] / c1;
        const double vhat = st.m2[j] / c2;
        p -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    });
}

void rmsprop_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
                  const FirstOrderConfig& cfg) {
    ++st.step;
    for_each_param(state, grad, cfg, st.step - 1, [&](size_t j, double lr, double& p) {
        st.m2[j] = cfg.rms_decay * st.m2[j] + (1.0 - cfg.rms_decay) * grad[j] * grad[j];
        p -= lr * grad[j] / (std::sqrt(st.m2[j]) + cfg.rms_eps);
    });
}

void sgd_momentum_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
                       const FirstOrderConfig& cfg) {
    ++st.step;
    for_each_param(state, grad, cfg, st.step - 1, [&](size_t j, double lr, double& p) {
        st.m1[j] = cfg.momentum * st.m1[j] - lr * grad[j];
        p += st.m1[j];
    });
}

void first_order_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
                      const FirstOrderConfig& cfg) {
    switch (cfg.kind) {
        case FirstOrderKind::kAdam: adam_step(st, state, grad, cfg); break;
        case FirstOrderKind::kRmsprop: rmsprop_step(st, state, grad, cfg); break;
        case FirstOrderKind::kSgdMomentum: sgd_momentum_step(st, state, grad, cfg); break;
    }
}

}  // namespace splatlm::baselines
