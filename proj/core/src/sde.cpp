#include "revive/sde.hpp"

#include <cmath>
#include <numbers>

#include "revive/errors.hpp"
#include "revive/rng.hpp"

namespace revive::sde {

AlphaProfile parse_profile(const std::string& name) {
    if (name == "constant") return AlphaProfile::Constant;
    if (name == "linear") return AlphaProfile::Linear;
    if (name == "cosine") return AlphaProfile::Cosine;
    throw DomainError("unknown alpha profile '" + name + "'");
}

std::string to_string(AlphaProfile profile) {
    switch (profile) {
        case AlphaProfile::Constant: return "constant";
        case AlphaProfile::Linear: return "linear";
        case AlphaProfile::Cosine: return "cosine";
    }
    return "constant";
}

SdeSchedule SdeSchedule::make(int steps, double kappa, AlphaProfile profile, double alpha_scale) {
    if (steps < 1) throw DomainError("schedule: step count must be >= 1");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("schedule: kappa must be > 0");
    if (!(alpha_scale > 0.0) || !std::isfinite(alpha_scale)) {
        throw DomainError("schedule: alpha_scale must be > 0");
    }
    SdeSchedule s;
    s.steps_ = steps;
    s.dt_ = 1.0 / steps;
    s.kappa_ = kappa;
    s.alpha_scale_ = alpha_scale;
    s.profile_ = profile;
    s.alpha_.assign(static_cast<std::size_t>(steps) + 1, 0.0);
    s.cum_alpha_.assign(static_cast<std::size_t>(steps) + 1, 0.0);
    for (int i = 1; i <= steps; ++i) {
        // Midpoint of step i, in (0, 1).
        const double u = (i - 0.5) / steps;
        double a = alpha_scale;
        switch (profile) {
            case AlphaProfile::Constant: break;
            case AlphaProfile::Linear: a = 2.0 * alpha_scale * u; break;
            case AlphaProfile::Cosine:
                a = alpha_scale * (1.0 - std::cos(std::numbers::pi * u));
                break;
        }
        s.alpha_[i] = a;
        s.cum_alpha_[i] = s.cum_alpha_[i - 1] + a * s.dt_;
    }
    return s;
}

double SdeSchedule::alpha(int i) const {
    if (i < 1 || i > steps_) throw DomainError("schedule: alpha index out of range");
    return alpha_[static_cast<std::size_t>(i)];
}

double SdeSchedule::beta(int i) const { return std::sqrt(2.0 * kappa_ * kappa_ * alpha(i)); }

double SdeSchedule::cumulative_alpha(int i) const {
    if (i < 0 || i > steps_) throw DomainError("schedule: time index out of range");
    return cum_alpha_[static_cast<std::size_t>(i)];
}

double SdeSchedule::alpha_hat(int s, int t) const {
    if (s > t) throw DomainError("schedule: s > t");
    return cumulative_alpha(t) - cumulative_alpha(s);
}

double SdeSchedule::variance(int s, int t) const {
    return kappa_ * kappa_ * -std::expm1(-2.0 * alpha_hat(s, t));
}

double SdeSchedule::sigma(int t) const { return std::sqrt(variance(0, t)); }

namespace {
void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}
}  // namespace

TransitionStats transition_stats(const SdeSchedule& schedule, const Tensor& y_s, const Tensor& mu,
                                 int s, int t) {
    require_same_shape(y_s, mu, "transition_stats");
    if (s < 0 || t > schedule.steps()) throw DomainError("transition_stats: index out of range");
    if (s > t) throw DomainError("transition_stats: s > t");
    const double decay = std::exp(-schedule.alpha_hat(s, t));
    auto y = y_s.data();
    auto m = mu.data();
    std::vector<double> mean(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) mean[i] = m[i] + (y[i] - m[i]) * decay;
    return TransitionStats{Tensor(y_s.shape(), std::move(mean)), schedule.variance(s, t)};
}

ForwardSample forward_sample(const SdeSchedule& schedule, const Tensor& y0, const Tensor& mu, int t,
                             std::uint64_t seed) {
    TransitionStats stats = transition_stats(schedule, y0, mu, 0, t);
    Rng rng(seed);
    Tensor noise = Tensor::randn(y0.shape(), rng);
    const double sigma = std::sqrt(stats.variance);
    std::vector<double> y(stats.mean.data().begin(), stats.mean.data().end());
    auto z = noise.data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += sigma * z[i];
    return ForwardSample{Tensor(y0.shape(), std::move(y)), noise};
}

Tensor exact_score(const SdeSchedule& schedule, const Tensor& y_t, const Tensor& y0,
                   const Tensor& mu, int t) {
    require_same_shape(y_t, y0, "exact_score");
    if (t == 0) throw DomainError("exact_score: undefined at t = 0 (zero variance)");
    const TransitionStats stats = transition_stats(schedule, y0, mu, 0, t);
    auto y = y_t.data();
    auto m = stats.mean.data();
    std::vector<double> score(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) score[i] = -(y[i] - m[i]) / stats.variance;
    return Tensor(y_t.shape(), std::move(score));
}

SdeState reverse_step(const SdeSchedule& schedule, const SdeState& state, const Tensor& score,
                      std::uint64_t seed, bool deterministic) {
    require_same_shape(state.y, state.mu, "reverse_step");
    require_same_shape(state.y, score, "reverse_step");
    const int t = state.t_index;
    if (t <= 0 || t > schedule.steps()) throw DomainError("reverse_step: t_index out of range");

    const double a = schedule.alpha(t);
    const double b = schedule.beta(t);
    const double dt = schedule.dt();
    auto y = state.y.data();
    auto m = state.mu.data();
    auto sc = score.data();
    std::vector<double> next(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double drift = a * (m[i] - y[i]) - b * b * sc[i];
        next[i] = y[i] - drift * dt;
    }
    if (!deterministic) {
        Rng rng(seed);
        const double amp = b * std::sqrt(dt);
        for (double& v : next) v += amp * rng.normal();
    }
    for (double v : next) {
        if (!std::isfinite(v)) throw NumericError("reverse_step: non-finite state");
    }
    return SdeState{Tensor(state.y.shape(), std::move(next)), state.mu, t - 1};
}

Tensor reverse_integrate(const SdeSchedule& schedule, const Tensor& y_T, const Tensor& mu,
                         const ScoreFn& score_fn, std::uint64_t seed, bool deterministic,
                         const StepObserver& observer) {
    SdeState state{y_T, mu, schedule.steps()};
    while (state.t_index > 0) {
        const Tensor score = score_fn(state.y, state.t_index);
        state = reverse_step(schedule, state, score,
                             derive_seed(seed, static_cast<std::uint64_t>(state.t_index)),
                             deterministic);
        if (observer) observer(state);
    }
    return state.y;
}

}  // namespace revive::sde
