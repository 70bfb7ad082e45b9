#pragma once

#include "revive/tensor.hpp"

namespace revive::metrics {

/// 10 log10(peak^2 / MSE) over all elements; +infinity when the inputs are equal.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

struct SsimOptions {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 1.0;
    void validate() const;
};

/// Mean SSIM over the luminance plane, Gaussian-weighted windows, valid
/// positions only. Averaged over the batch.
double ssim(const Tensor& a, const Tensor& b, const SsimOptions& options = {});

/// Per-position SSIM map of one batch item, (H - window + 1) x (W - window + 1).
Tensor ssim_map(const Tensor& a, const Tensor& b, std::size_t item, const SsimOptions& options = {});

struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
};

MetricReport evaluate(const Tensor& restored, const Tensor& reference);

}  // namespace revive::metrics
