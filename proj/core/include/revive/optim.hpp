#pragma once

#include <cstdint>
#include <vector>

#include "revive/blocks.hpp"

namespace revive::nn {

struct AdamOptions {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction. Updates the parameter tensors in place from
/// their accumulated gradients; parameters without a gradient are skipped.
class Adam {
public:
    Adam(ParamList params, AdamOptions options);

    void step();
    void zero_grad();

    std::int64_t steps() const { return steps_; }
    const AdamOptions& options() const { return options_; }
    const ParamList& parameters() const { return params_; }

    /// First and second moments, named "adam.m/<param>" and "adam.v/<param>".
    ParamList state() const;
    void load_state(const ParamList& state, std::int64_t steps);

private:
    ParamList params_;
    AdamOptions options_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::int64_t steps_ = 0;
};

}  // namespace revive::nn
