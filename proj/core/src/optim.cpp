#include "revive/optim.hpp"

#include <algorithm>
#include <cmath>

#include "revive/errors.hpp"

namespace revive::nn {

Adam::Adam(ParamList params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
    if (options_.learning_rate < 0.0) throw DomainError("adam: negative learning rate");
    for (auto& [name, p] : params_) {
        p.set_requires_grad(true);
        m_.emplace_back(p.shape(), 0.0);
        v_.emplace_back(p.shape(), 0.0);
    }
}

void Adam::step() {
    ++steps_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t k = 0; k < params_.size(); ++k) {
        Tensor& p = params_[k].second;
        if (!p.has_grad()) continue;
        const Tensor g = p.grad();
        auto gd = g.data();
        auto pd = p.mutable_data();
        auto md = m_[k].mutable_data();
        auto vd = v_[k].mutable_data();
        for (std::size_t i = 0; i < pd.size(); ++i) {
            md[i] = b1 * md[i] + (1.0 - b1) * gd[i];
            vd[i] = b2 * vd[i] + (1.0 - b2) * gd[i] * gd[i];
            const double m_hat = md[i] / correction1;
            const double v_hat = vd[i] / correction2;
            pd[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (auto& [name, p] : params_) p.zero_grad();
}

ParamList Adam::state() const {
    ParamList out;
    for (std::size_t k = 0; k < params_.size(); ++k) {
        out.emplace_back("adam.m/" + params_[k].first, m_[k]);
        out.emplace_back("adam.v/" + params_[k].first, v_[k]);
    }
    return out;
}

void Adam::load_state(const ParamList& state, std::int64_t steps) {
    auto lookup = [&](const std::string& name) -> const Tensor& {
        auto it = std::find_if(state.begin(), state.end(),
                               [&](const auto& e) { return e.first == name; });
        if (it == state.end()) throw IoError("adam: missing state '" + name + "'");
        return it->second;
    };
    for (std::size_t k = 0; k < params_.size(); ++k) {
        const Tensor& m = lookup("adam.m/" + params_[k].first);
        const Tensor& v = lookup("adam.v/" + params_[k].first);
        if (m.shape() != m_[k].shape() || v.shape() != v_[k].shape()) {
            throw IoError("adam: state shape mismatch for '" + params_[k].first + "'");
        }
        m_[k] = m.clone();
        v_[k] = v.clone();
    }
    steps_ = steps;
}

}  // namespace revive::nn
