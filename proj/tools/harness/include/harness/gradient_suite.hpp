#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace harness {

struct GradCaseResult {
    std::string name;
    int trials = 0;
    double worst_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct GradSuiteOptions {
    int trials_per_case = 4;
    double primitive_tolerance = 1e-4;
    double block_tolerance = 1e-3;
    std::uint64_t seed = 0;
};

/// Central-difference checks of every differentiable primitive and the composed
/// C2F block on randomized inputs. Each trial draws fresh shapes' contents.
std::vector<GradCaseResult> run_gradient_suite(const GradSuiteOptions& options);

std::vector<std::string> gradient_case_names();

}  // namespace harness
