#pragma once

#include <span>
#include <vector>

#include "splatlm/autodiff/dual.hpp"
#include "splatlm/core/types.hpp"
#include "splatlm/render/rasterizer.hpp"
#include "splatlm/sampling/sample_plan.hpp"

namespace splatlm::autodiff {

// Matrix-free products with the Jacobian J of the sampled residual vector
// with respect to the raw Gaussian parameters. Rows are ordered
// (view, sample, channel); columns follow the flat parameter layout.
//
// Jv runs the sampled pixels through the renderer in dual arithmetic;
// J^T v reverses the blending by hand and chains through a per-(camera,
// Gaussian) projection Jacobian built from dual probes of the same
// preparation code, which keeps the two products adjoint-consistent.
//
// Derivatives flow through projection, covariance, activations and blending;
// cameras are constants, and the forward pass's gating decisions (skip,
// clamp, termination, culling, depth order) are frozen.
class SampledJacobian {
public:
    SampledJacobian(const GaussianSet& gaussians, std::span<const Camera> cams,
                    const sampling::SamplePlan& plan);

    std::size_t residual_dim() const { return 3 * plan_.total_samples(); }
    std::size_t param_dim() const { return gaussians_.param_count(); }

    void jvp(const ParamVector& v, std::span<double> out) const;
    std::vector<double> jvp(const ParamVector& v) const;

    void vjp(std::span<const double> u, ParamVector& out) const;
    ParamVector vjp(std::span<const double> u) const;

    // Estimator weights per residual entry: (1/q) / N_total, replicated over
    // the three channels of a sample. jtj_diag and gn_apply weight with
    // these; the solver overrides them when extra per-channel loss terms are
    // active.
    const std::vector<double>& residual_weights() const { return weights_; }
    void set_residual_weights(std::vector<double> w);

    // entry j = sum_i w_i (dr_i/dbeta_j)^2 over sampled residuals.
    ParamVector jtj_diag() const;

    // out = J^T W J p + lambda p.
    void gn_apply(double lambda, const ParamVector& p, ParamVector& out) const;
    ParamVector gn_apply(double lambda, const ParamVector& p) const;

    const render::CameraContext& context(int view) const { return contexts_[view]; }
    const sampling::SamplePlan& plan() const { return plan_; }

private:
    struct ProjChain {
        // d(mean2d.x, mean2d.y, conic_a, conic_b, conic_c) /
        // d(mean xyz, log_scale xyz, quaternion wxyz)
        double p[5][10];
        double dopacity_dlogit;
        double dcolor_dcoeff[3];
        bool valid;
    };

    void build_chains();
    std::vector<render::PreparedSplat<Dual>> dual_splats(int view, const ParamVector& v) const;

    GaussianSet gaussians_;
    std::vector<Camera> cams_;
    sampling::SamplePlan plan_;
    std::vector<render::CameraContext> contexts_;
    std::vector<std::vector<ProjChain>> chains_;  // [view][gaussian]
    std::vector<std::size_t> view_offsets_;       // sample offset per view
    std::vector<double> weights_;
};

// Spec-shaped one-shot wrappers (tests and small callers); the class keeps
// the per-batch state when many products are needed.
std::vector<double> jvp(const GaussianSet& g, std::span<const Camera> cams,
                        const sampling::SamplePlan& plan, const ParamVector& v);
ParamVector vjp(const GaussianSet& g, std::span<const Camera> cams,
                const sampling::SamplePlan& plan, std::span<const double> u);
ParamVector jtj_diag(const GaussianSet& g, std::span<const Camera> cams,
                     const sampling::SamplePlan& plan);
ParamVector gn_apply(const GaussianSet& g, std::span<const Camera> cams,
                     const sampling::SamplePlan& plan, double lambda, const ParamVector& p);

}  // namespace splatlm::autodiff
