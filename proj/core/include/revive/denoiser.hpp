#pragma once

#include <span>

#include "revive/sde.hpp"
#include "revive/unet.hpp"

namespace revive::nn {

/// Wraps the U-Net as a score model for the reverse SDE.
///
/// The network output is read as a residual estimate of the clean image,
/// y0_hat = mu + net(y_t, mu, t). The noise estimate follows from the closed-form
/// transition, zeta_hat = (y_t - mean_t(y0_hat)) / sigma_t, and the score is
/// -zeta_hat / sigma_t.
struct Denoiser {
    NetworkSpec spec;
    UNetWeights weights;

    /// Differentiable when a tape is active.
    Tensor predict_clean(const Tensor& y_t, const Tensor& mu, std::span<const int> t) const;
    Tensor predict_noise(const sde::SdeSchedule& schedule, const Tensor& y_t, const Tensor& mu,
                         int t) const;
    Tensor score(const sde::SdeSchedule& schedule, const Tensor& y_t, const Tensor& mu,
                 int t) const;
};

}  // namespace revive::nn
