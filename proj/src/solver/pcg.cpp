#include "splatlm/solver/pcg.hpp"

#include <cmath>
#include <stdexcept>

#include "splatlm/kernels/vec_kernels.hpp"

namespace splatlm::solver {

PcgResult pcg_solve(const ApplyFn& apply, const ParamVector& b, const ParamVector& minv,
                    int max_iters) {
    const std::size_t n = b.size();
    if (minv.size() != n) throw std::invalid_argument("pcg: preconditioner length mismatch");

    PcgResult res;
    res.x.assign(n, 0.0);

    const double b_norm = std::sqrt(kernels::sum_squares(b.data(), n));
    if (b_norm == 0.0) {
        res.rel_residual = 0.0;
        return res;
    }

    ParamVector r = b;  // residual of x0 = 0
    ParamVector z(n), p(n), u(n);
    kernels::hadamard(minv.data(), r.data(), z.data(), n);
    p = z;
    double rz = kernels::dot(r.data(), z.data(), n);

    for (int i = 0; i < max_iters; ++i) {
        apply(p, u);
        const double pu = kernels::dot(p.data(), u.data(), n);
        if (pu <= 0.0) {
            res.breakdown = true;
            break;
        }
        const double alpha = rz / pu;
        kernels::axpy(alpha, p.data(), res.x.data(), n);
        kernels::axpy(-alpha, u.data(), r.data(), n);
        ++res.iterations;

        if (std::sqrt(kernels::sum_squares(r.data(), n)) <= 1e-12 * b_norm) break;

        kernels::hadamard(minv.data(), r.data(), z.data(), n);
        const double rz_next = kernels::dot(r.data(), z.data(), n);
        const double beta = rz_next / rz;
        rz = rz_next;
        kernels::xpby(z.data(), beta, p.data(), n);  // p = z + beta p
    }

    res.rel_residual = std::sqrt(kernels::sum_squares(r.data(), n)) / b_norm;
    return res;
}

}  // namespace splatlm::solver
