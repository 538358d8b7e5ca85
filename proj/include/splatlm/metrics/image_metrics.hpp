#pragma once

#include "splatlm/core/types.hpp"

namespace splatlm::metrics {

struct MetricReport {
    double mse = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

double mse(const Image& a, const Image& b);

// 10 log10(peak^2 / mse) with peak 1.0, capped at 100 dB when mse < 1e-10.
double psnr(const Image& a, const Image& b);

// Mean local SSIM, 11x11 Gaussian window (sigma 1.5), reflect padding,
// standard stability constants, averaged over channels.
double ssim(const Image& a, const Image& b);

// Least-squares form of the SSIM loss: per pixel/channel residual
// s = sqrt(max(0, 1 - SSIM_local)) and its derivative with respect to the
// center pixel of `a` only (neighbor cross-terms dropped -- the diagonal
// approximation). sum(s^2) recovers the SSIM loss.
struct SsimDiagResiduals {
    Image residual;
    Image d_center;
};
SsimDiagResiduals ssim_diag_residuals(const Image& a, const Image& b);

MetricReport evaluate(const Image& rendered, const Image& ground_truth);

}  // namespace splatlm::metrics
