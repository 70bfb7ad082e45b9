#include "revive/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "revive/errors.hpp"

namespace revive {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape::Tape() : previous_(g_active_tape) { g_active_tape = this; }

Tape::~Tape() {
    if (g_active_tape == this) g_active_tape = previous_;
}

Tape* Tape::active() { return g_active_tape; }

void Tape::record(TapeNode node) { nodes_.push_back(std::move(node)); }

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ShapeError("backward: loss must be a scalar tensor");
    }
    if (nodes_.empty()) throw NumericError("backward: tape is empty");
    if (!loss.requires_grad()) {
        throw NumericError("backward: loss does not depend on any trainable tensor");
    }
    auto& seed = loss.impl()->grad;
    if (seed.empty()) seed.assign(1, 0.0);
    seed[0] += 1.0;

    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
        const auto& grad_out = it->output->grad;
        if (grad_out.empty()) continue;
        it->backward(grad_out);
    }
    nodes_.clear();
}

void backward(const Tensor& loss) {
    Tape* tape = Tape::active();
    if (tape == nullptr) throw NumericError("backward: no active tape");
    tape->backward(loss);
}

NoGradGuard::NoGradGuard() : saved_(g_active_tape) { g_active_tape = nullptr; }

NoGradGuard::~NoGradGuard() { g_active_tape = saved_; }

GradCheckReport grad_check(const std::function<Tensor()>& fn, std::span<const Tensor> wrt,
                           double tolerance, double step) {
    GradCheckReport report;
    report.tolerance = tolerance;

    std::vector<Tensor> leaves(wrt.begin(), wrt.end());
    std::vector<bool> saved_flags;
    saved_flags.reserve(leaves.size());
    for (auto& t : leaves) {
        saved_flags.push_back(t.requires_grad());
        t.set_requires_grad(true);
        t.zero_grad();
    }

    std::vector<Tensor> analytic;
    {
        Tape tape;
        Tensor loss = fn();
        tape.backward(loss);
    }
    for (auto& t : leaves) {
        analytic.push_back(t.grad());
        t.zero_grad();
    }

    NoGradGuard no_grad;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        auto values = leaves[k].mutable_data();
        auto g = analytic[k].data();
        double scale = 0.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + step;
            const double up = fn().item();
            values[i] = original - step;
            const double down = fn().item();
            values[i] = original;
            const double numeric = (up - down) / (2.0 * step);
            scale = std::max({scale, std::abs(numeric), std::abs(g[i])});
            worst = std::max(worst, std::abs(numeric - g[i]));
            ++report.elements_checked;
        }
        report.max_abs_error = std::max(report.max_abs_error, worst);
        const double rel = scale > 0.0 ? worst / scale : worst;
        report.max_rel_error = std::max(report.max_rel_error, rel);
    }

    for (std::size_t k = 0; k < leaves.size(); ++k) leaves[k].set_requires_grad(saved_flags[k]);
    report.passed = report.max_rel_error < tolerance;
    return report;
}

GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& input,
                           double tolerance, double step) {
    const Tensor leaf = input;
    return grad_check([&] { return fn(leaf); }, std::span<const Tensor>(&leaf, 1), tolerance,
                      step);
}

}  // namespace revive
