#include "revive/denoiser.hpp"

#include <cmath>

#include "revive/autodiff.hpp"
#include "revive/errors.hpp"
#include "revive/ops.hpp"

namespace revive::nn {

Tensor Denoiser::predict_clean(const Tensor& y_t, const Tensor& mu, std::span<const int> t) const {
    return add(mu, unet_forward(spec, weights, y_t, mu, t));
}

Tensor Denoiser::predict_noise(const sde::SdeSchedule& schedule, const Tensor& y_t,
                               const Tensor& mu, int t) const {
    if (t < 1 || t > schedule.steps()) throw DomainError("predict_noise: t out of range");
    NoGradGuard no_grad;
    const Tensor clean = predict_clean(y_t, mu, std::span<const int>(&t, 1));
    const sde::TransitionStats stats = sde::transition_stats(schedule, clean, mu, 0, t);
    const double sigma = std::sqrt(stats.variance);
    auto y = y_t.data();
    auto m = stats.mean.data();
    std::vector<double> zeta(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) zeta[i] = (y[i] - m[i]) / sigma;
    return Tensor(y_t.shape(), std::move(zeta));
}

Tensor Denoiser::score(const sde::SdeSchedule& schedule, const Tensor& y_t, const Tensor& mu,
                       int t) const {
    const Tensor zeta = predict_noise(schedule, y_t, mu, t);
    const double sigma = schedule.sigma(t);
    std::vector<double> s(zeta.data().begin(), zeta.data().end());
    for (double& v : s) v = -v / sigma;
    return Tensor(zeta.shape(), std::move(s));
}

}  // namespace revive::nn
