#pragma once

#include <span>
#include <vector>

#include "splatlm/core/types.hpp"
#include "splatlm/solver/lm.hpp"

namespace splatlm::baselines {

enum class FirstOrderKind { kAdam, kRmsprop, kSgdMomentum };

// Learning rates per parameter group; raw (pre-activation) coordinates.
struct GroupLrs {
    double mean = 1.6e-3;
    double color = 2.5e-2;
    double opacity = 5e-2;
    double scale = 5e-3;
    double rotation = 1e-3;
};

struct FirstOrderConfig {
    FirstOrderKind kind = FirstOrderKind::kAdam;
    GroupLrs lrs;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-15;
    double rms_decay = 0.99;
    double rms_eps = 1e-15;
    double momentum = 0.99;
    // Exponential decay of the mean-group learning rate down to
    // mean_lr_final_factor over decay_iterations (0 disables it).
    double mean_lr_final_factor = 0.01;
    int decay_iterations = 0;
    solver::LossKind loss = solver::LossKind::kMse;
    double ssim_weight = 0.2;

    static GroupLrs sgd_paper_lrs() { return {0.16, 0.2, 0.1, 0.1, 0.1}; }
};

struct FirstOrderState {
    ParamVector m1;  // first moment / velocity
    ParamVector m2;  // second moment (Adam, RMSprop)
    long step = 0;

    static FirstOrderState zeros(int param_count) {
        FirstOrderState s;
        s.m1.assign(param_count, 0.0);
        s.m2.assign(param_count, 0.0);
        return s;
    }
};

// Gradient of the exact batch loss (every pixel of every camera, no
// sampling), computed by the same reverse path the solver uses.
ParamVector full_gradient(const GaussianSet& state, std::span<const Camera> cams,
                          std::span<const Image> gts, solver::LossKind loss, double ssim_weight);

double group_lr(const GroupLrs& lrs, int index_in_block);

void adam_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
               const FirstOrderConfig& cfg);
void rmsprop_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
                  const FirstOrderConfig& cfg);
void sgd_momentum_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
                       const FirstOrderConfig& cfg);

// Dispatch on cfg.kind.
void first_order_step(FirstOrderState& st, GaussianSet& state, const ParamVector& grad,
                      const FirstOrderConfig& cfg);

}  // namespace splatlm::baselines
