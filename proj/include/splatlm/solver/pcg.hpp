#pragma once

#include <functional>

#include "splatlm/core/types.hpp"

namespace splatlm::solver {

struct PcgResult {
    ParamVector x;
    int iterations = 0;
    bool breakdown = false;     // p^T u <= 0: operator not SPD / numerical breakdown
    double rel_residual = 1.0;  // |r| / |b| at exit
};

using ApplyFn = std::function<void(const ParamVector&, ParamVector&)>;

// Jacobi-preconditioned conjugate gradient on an SPD operator, starting from
// x0 = 0. Runs max_iters iterations unless |r| <= 1e-12 |b| first. On
// breakdown the current iterate is returned with the flag set. minv holds the
// reciprocal diagonal preconditioner (entries > 0).
PcgResult pcg_solve(const ApplyFn& apply, const ParamVector& b, const ParamVector& minv,
                    int max_iters);

}  // namespace splatlm::solver
