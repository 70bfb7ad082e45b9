#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "revive/tensor.hpp"

namespace revive::sde {

enum class AlphaProfile { Constant, Linear, Cosine };

AlphaProfile parse_profile(const std::string& name);
std::string to_string(AlphaProfile profile);

/// Discretized mean-reverting process
///   dy = alpha(t) (mu - y) dt + beta(t) dW,   beta(t)^2 = 2 kappa^2 alpha(t),
/// on t in [0, 1] with T uniform steps of size dt = 1/T. Step i (1-based) covers
/// (t_{i-1}, t_i] and carries rate alpha_i; cumulative_alpha(i) = sum_{j<=i} alpha_j dt.
class SdeSchedule {
public:
    /// alpha_scale is the mean rate; every profile integrates to alpha_scale over [0, 1].
    static SdeSchedule make(int steps, double kappa, AlphaProfile profile = AlphaProfile::Constant,
                            double alpha_scale = 3.0);

    int steps() const { return steps_; }
    double dt() const { return dt_; }
    double kappa() const { return kappa_; }
    double stationary_variance() const { return kappa_ * kappa_; }
    AlphaProfile profile() const { return profile_; }
    double alpha_scale() const { return alpha_scale_; }

    /// Rate on step i, 1 <= i <= T.
    double alpha(int i) const;
    /// Volatility on step i, from the solvability condition.
    double beta(int i) const;
    /// alpha_hat(0 : t_i), 0 <= i <= T.
    double cumulative_alpha(int i) const;
    /// alpha_hat(t_s : t_t).
    double alpha_hat(int s, int t) const;
    /// Transition variance kappa^2 (1 - exp(-2 alpha_hat(s:t))).
    double variance(int s, int t) const;
    /// Standard deviation of y_t given y_0.
    double sigma(int t) const;

private:
    SdeSchedule() = default;
    int steps_ = 0;
    double dt_ = 0.0;
    double kappa_ = 0.0;
    double alpha_scale_ = 0.0;
    AlphaProfile profile_ = AlphaProfile::Constant;
    std::vector<double> alpha_;       // index 0 unused
    std::vector<double> cum_alpha_;   // size T + 1
};

/// Current reverse-time state.
struct SdeState {
    Tensor y;
    Tensor mu;
    int t_index = 0;
};

struct TransitionStats {
    Tensor mean;
    double variance = 0.0;
};

/// Closed-form law of y_t given y_s: mean mu + (y_s - mu) e^{-alpha_hat(s:t)}.
TransitionStats transition_stats(const SdeSchedule& schedule, const Tensor& y_s, const Tensor& mu,
                                 int s, int t);

struct ForwardSample {
    Tensor y_t;
    Tensor noise;  // the standard normal draw zeta
};

/// y_t = mean_t + sigma_t * zeta, zeta ~ N(0, I) drawn from `seed`.
ForwardSample forward_sample(const SdeSchedule& schedule, const Tensor& y0, const Tensor& mu, int t,
                             std::uint64_t seed);

/// grad_y log p_t(y | y0) = -(y_t - mean_t) / sigma_t^2. Throws for t = 0.
Tensor exact_score(const SdeSchedule& schedule, const Tensor& y_t, const Tensor& y0,
                   const Tensor& mu, int t);

/// One Euler-Maruyama step of the reverse SDE from t_index to t_index - 1:
///   y <- y - [alpha (mu - y) - beta^2 score] dt + beta sqrt(dt) z.
/// deterministic drops the noise term.
SdeState reverse_step(const SdeSchedule& schedule, const SdeState& state, const Tensor& score,
                      std::uint64_t seed, bool deterministic);

using ScoreFn = std::function<Tensor(const Tensor& y, int t)>;
/// Called after each step with the new state.
using StepObserver = std::function<void(const SdeState&)>;

/// Runs reverse_step from T down to 0. Step t draws its noise from derive_seed(seed, t).
Tensor reverse_integrate(const SdeSchedule& schedule, const Tensor& y_T, const Tensor& mu,
                         const ScoreFn& score_fn, std::uint64_t seed, bool deterministic,
                         const StepObserver& observer = {});

}  // namespace revive::sde
