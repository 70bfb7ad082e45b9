#include "harness/gradient_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "revive/autodiff.hpp"
#include "revive/blocks.hpp"
#include "revive/losses.hpp"
#include "revive/ops.hpp"
#include "revive/rng.hpp"

namespace harness {

namespace {

using revive::Rng;
using revive::Shape;
using revive::Tensor;

Tensor randn(Shape s, Rng& rng, double std = 1.0) { return Tensor::randn(s, rng, std); }

// Values bounded away from zero so kinks at 0 stay outside the difference stencil.
Tensor away_from_zero(Shape s, Rng& rng) {
    Tensor t(s);
    for (double& v : t.mutable_data()) {
        const double m = rng.uniform(0.1, 1.0);
        v = rng.uniform() < 0.5 ? -m : m;
    }
    return t;
}

// Values in (0, 1) at least `margin` away from every multiple of 1 / (2 bins).
Tensor away_from_bin_kinks(Shape s, Rng& rng, int bins, double margin) {
    Tensor t(s);
    const double cell = 1.0 / (2.0 * bins);
    for (double& v : t.mutable_data()) {
        const auto k = rng.uniform_int(0, 2 * bins - 1);
        v = (k + rng.uniform(margin / cell, 1.0 - margin / cell)) * cell;
    }
    return t;
}

// Contracts an output with fixed random weights into a scalar.
Tensor project(const Tensor& out, const Tensor& weights) { return revive::sum(revive::mul(out, weights)); }

struct Case {
    std::string name;
    bool block = false;
    // Builds tensors from rng, then returns the grad-check report.
    std::function<revive::GradCheckReport(Rng&, double tol)> run;
};

template <typename Fn>
revive::GradCheckReport check(std::vector<Tensor> wrt, Fn&& fn, double tol) {
    return revive::grad_check(std::function<Tensor()>(std::forward<Fn>(fn)), wrt, tol);
}

std::vector<Case> build_cases() {
    using namespace revive;
    std::vector<Case> cases;
    auto unary = [&](std::string name, std::function<Tensor(const Tensor&)> op,
                     std::function<Tensor(Shape, Rng&)> gen) {
        cases.push_back({std::move(name), false, [op, gen](Rng& rng, double tol) {
                             const Shape s{2, 3, 4, 4};
                             Tensor x = gen(s, rng);
                             Tensor r = randn(op(x).shape(), rng);
                             return check({x}, [=] { return project(op(x), r); }, tol);
                         }});
    };
    auto normal = [](Shape s, Rng& rng) { return Tensor::randn(s, rng); };

    cases.push_back({"conv2d", false, [](Rng& rng, double tol) {
                         Tensor x = randn({2, 3, 5, 5}, rng);
                         Tensor k = randn({4, 3, 3, 3}, rng, 0.3);
                         Tensor b = randn({1, 4, 1, 1}, rng);
                         Tensor r = randn({2, 4, 5, 5}, rng);
                         return check({x, k, b}, [=] { return project(conv2d(x, k, b), r); }, tol);
                     }});
    cases.push_back({"conv2d_dilated_grouped", false, [](Rng& rng, double tol) {
                         Tensor x = randn({1, 4, 7, 7}, rng);
                         Tensor k = randn({4, 2, 3, 3}, rng, 0.3);
                         Tensor r = randn({1, 4, 7, 7}, rng);
                         Conv2dOptions opt;
                         opt.dilation = 2;
                         opt.groups = 2;
                         return check({x, k}, [=] { return project(conv2d(x, k, {}, opt), r); }, tol);
                     }});
    cases.push_back({"conv2d_strided", false, [](Rng& rng, double tol) {
                         Tensor x = randn({1, 2, 6, 6}, rng);
                         Tensor k = randn({3, 2, 2, 2}, rng, 0.3);
                         Tensor b = randn({1, 3, 1, 1}, rng);
                         Tensor r = randn({1, 3, 3, 3}, rng);
                         Conv2dOptions opt;
                         opt.stride = 2;
                         opt.padding = 0;
                         return check({x, k, b}, [=] { return project(conv2d(x, k, b, opt), r); }, tol);
                     }});
    cases.push_back({"depthwise_conv2d", false, [](Rng& rng, double tol) {
                         Tensor x = randn({1, 3, 5, 5}, rng);
                         Tensor k = randn({6, 1, 3, 3}, rng, 0.3);
                         Tensor b = randn({1, 6, 1, 1}, rng);
                         Tensor r = randn({1, 6, 5, 5}, rng);
                         return check({x, k, b},
                                      [=] { return project(depthwise_conv2d(x, k, b), r); }, tol);
                     }});
    cases.push_back({"layer_norm", false, [](Rng& rng, double tol) {
                         Tensor x = randn({2, 4, 3, 3}, rng);
                         Tensor g = randn({1, 4, 1, 1}, rng);
                         Tensor b = randn({1, 4, 1, 1}, rng);
                         Tensor r = randn({2, 4, 3, 3}, rng);
                         return check({x, g, b},
                                      [=] { return project(layer_norm(x, g, b, 1e-6), r); }, tol);
                     }});
    cases.push_back({"simple_gate", false, [](Rng& rng, double tol) {
                         Tensor x = randn({2, 4, 3, 3}, rng);
                         Tensor r = randn({2, 2, 3, 3}, rng);
                         return check({x}, [=] { return project(simple_gate(x), r); }, tol);
                     }});
    cases.push_back({"sca", false, [](Rng& rng, double tol) {
                         Tensor x = randn({2, 4, 4, 4}, rng);
                         Tensor w = randn({4, 4, 1, 1}, rng, 0.5);
                         Tensor b = randn({1, 4, 1, 1}, rng);
                         Tensor r = randn({2, 4, 4, 4}, rng);
                         return check({x, w, b}, [=] { return project(sca(x, w, b), r); }, tol);
                     }});
    for (auto [name, kind] : {std::pair{"pool_avg_channels", PoolKind::AvgOverChannels},
                              std::pair{"pool_max_channels", PoolKind::MaxOverChannels},
                              std::pair{"pool_avg_space", PoolKind::AvgOverSpace}}) {
        cases.push_back({name, false, [kind](Rng& rng, double tol) {
                             Tensor x = randn({2, 4, 3, 3}, rng);
                             const Tensor probe = pool_reduce(x, kind);
                             Tensor r = randn(probe.shape(), rng);
                             return check({x}, [=] { return project(pool_reduce(x, kind), r); }, tol);
                         }});
    }
    cases.push_back({"add_channel_broadcast", false, [](Rng& rng, double tol) {
                         Tensor a = randn({2, 3, 4, 4}, rng);
                         Tensor b = randn({1, 3, 1, 1}, rng);
                         Tensor r = randn({2, 3, 4, 4}, rng);
                         return check({a, b}, [=] { return project(add(a, b), r); }, tol);
                     }});
    cases.push_back({"sub_spatial_broadcast", false, [](Rng& rng, double tol) {
                         Tensor a = randn({2, 3, 4, 4}, rng);
                         Tensor b = randn({2, 1, 4, 4}, rng);
                         Tensor r = randn({2, 3, 4, 4}, rng);
                         return check({a, b}, [=] { return project(sub(b, a), r); }, tol);
                     }});
    cases.push_back({"mul", false, [](Rng& rng, double tol) {
                         Tensor a = randn({2, 3, 4, 4}, rng);
                         Tensor b = randn({2, 3, 4, 4}, rng);
                         Tensor c = randn({2, 3, 1, 1}, rng);
                         Tensor r = randn({2, 3, 4, 4}, rng);
                         return check({a, b, c}, [=] { return project(mul(mul(a, b), c), r); }, tol);
                     }});
    unary("sigmoid", [](const Tensor& x) { return sigmoid(x); }, normal);
    unary("relu", [](const Tensor& x) { return relu(x); }, away_from_zero);
    unary("abs", [](const Tensor& x) { return revive::abs(x); }, away_from_zero);
    unary("square", [](const Tensor& x) { return square(x); }, normal);
    unary("softplus", [](const Tensor& x) { return softplus(x); }, normal);
    unary("sqrt_eps", [](const Tensor& x) { return sqrt_eps(square(x), 1e-3); }, normal);
    unary("scale_shift",
          [](const Tensor& x) { return one_minus(add_scalar(scale(x, -1.7), 0.3)); }, normal);
    unary("interp2x_up", [](const Tensor& x) { return square(interp2x_up(x)); }, normal);
    unary("interp2x_down", [](const Tensor& x) { return square(interp2x_down(x)); }, normal);
    unary("sum_mean", [](const Tensor& x) { return add(mean(square(x)), scale(sum(x), 0.1)); },
          normal);
    cases.push_back({"pointwise_dispatch", false, [](Rng& rng, double tol) {
                         Tensor a = randn({1, 2, 4, 4}, rng);
                         Tensor b = randn({1, 2, 4, 4}, rng);
                         Tensor r = randn({1, 2, 4, 4}, rng);
                         return check({a, b}, [=] {
                             Tensor y = pointwise(a, b, PointwiseOp::Mul);
                             y = pointwise(y, b, PointwiseOp::Add);
                             y = pointwise(y, {}, PointwiseOp::Sigmoid);
                             y = pointwise(y, {}, PointwiseOp::Interp2xUp);
                             y = pointwise(y, {}, PointwiseOp::Interp2xDown);
                             return project(y, r);
                         }, tol);
                     }});
    cases.push_back({"concat_channels", false, [](Rng& rng, double tol) {
                         Tensor a = randn({2, 2, 3, 3}, rng);
                         Tensor b = randn({2, 3, 3, 3}, rng);
                         Tensor r = randn({2, 5, 3, 3}, rng);
                         return check({a, b}, [=] { return project(concat_channels(a, b), r); }, tol);
                     }});
    cases.push_back({"soft_histogram", false, [](Rng& rng, double tol) {
                         const int bins = 8;
                         Tensor x = away_from_bin_kinks({2, 3, 4, 4}, rng, bins, 1e-3);
                         Tensor r = randn({2, 3, 1, bins}, rng);
                         return check({x}, [=] { return project(soft_histogram(x, bins), r); }, tol);
                     }});
    cases.push_back({"soft_edge_magnitude", false, [](Rng& rng, double tol) {
                         Tensor x = Tensor::uniform({1, 3, 9, 9}, rng, 0.0, 1.0);
                         Tensor r = randn({1, 1, 9, 9}, rng);
                         return check({x},
                                      [=] { return project(loss::soft_edge_magnitude(x), r); }, tol);
                     }});

    auto block_case = [&](std::string name,
                          std::function<Tensor(const Tensor&, const nn::BlockSpec&,
                                               const nn::C2FBlockWeights&)> fn) {
        cases.push_back({std::move(name), true, [fn](Rng& rng, double tol) {
                             nn::BlockSpec spec;
                             spec.channels = 8;
                             const auto w = nn::C2FBlockWeights::init(spec, rng);
                             Tensor x = randn({1, 8, 9, 9}, rng);
                             const Tensor probe = fn(x, spec, w);
                             Tensor r = randn(probe.shape(), rng);
                             nn::ParamList params;
                             w.collect("", params);
                             std::vector<Tensor> wrt{x};
                             for (auto& [n, p] : params) wrt.push_back(p);
                             return check(wrt, [=] { return project(fn(x, spec, w), r); }, tol);
                         }});
    };
    block_case("fine_branch", [](const Tensor& x, const nn::BlockSpec& s, const nn::C2FBlockWeights& w) {
        return nn::fine_branch(x, s, w.fine);
    });
    block_case("coarse_branch", [](const Tensor& x, const nn::BlockSpec& s, const nn::C2FBlockWeights& w) {
        const auto f = nn::coarse_branch(x, s, w.coarse);
        return add(add(f.f7, f.f15), f.f31);
    });
    block_case("mafc_fuse", [](const Tensor& x, const nn::BlockSpec& s, const nn::C2FBlockWeights& w) {
        const Tensor fine = nn::fine_branch(x, s, w.fine);
        return nn::mafc_fuse(fine, nn::coarse_branch(fine, s, w.coarse).f31, w.mafc);
    });
    block_case("c2f_block", [](const Tensor& x, const nn::BlockSpec& s, const nn::C2FBlockWeights& w) {
        return nn::c2f_block(x, s, w);
    });
    return cases;
}

}  // namespace

std::vector<std::string> gradient_case_names() {
    std::vector<std::string> names;
    for (const auto& c : build_cases()) names.push_back(c.name);
    return names;
}

std::vector<GradCaseResult> run_gradient_suite(const GradSuiteOptions& options) {
    std::vector<GradCaseResult> results;
    const auto cases = build_cases();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        GradCaseResult res;
        res.name = c.name;
        res.tolerance = c.block ? options.block_tolerance : options.primitive_tolerance;
        res.passed = true;
        for (int trial = 0; trial < options.trials_per_case; ++trial) {
            Rng rng(revive::derive_seed(revive::derive_seed(options.seed, i), trial));
            const auto report = c.run(rng, res.tolerance);
            res.worst_rel_error = std::max(res.worst_rel_error, report.max_rel_error);
            res.passed = res.passed && report.passed;
            ++res.trials;
        }
        results.push_back(res);
    }
    return results;
}

}  // namespace harness
