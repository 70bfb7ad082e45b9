#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "revive/tensor.hpp"

namespace revive {

/// One recorded operation. `backward` reads the output's gradient and
/// accumulates into the inputs that require it.
struct TapeNode {
    std::string op;
    std::shared_ptr<detail::TensorImpl> output;
    std::function<void(const std::vector<double>& grad_out)> backward;
};

/// Reverse-mode tape. Constructing a Tape makes it the active recorder for the
/// current thread until it is destroyed; operations whose inputs require
/// gradients append a node to it. A tape is single-owner and must not be
/// shared across threads.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Tape currently recording on this thread, or nullptr.
    static Tape* active();

    void record(TapeNode node);
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const std::vector<TapeNode>& nodes() const { return nodes_; }

    /// Propagates d(loss)/d(.) to every requires_grad leaf, visiting each node
    /// once in reverse recording order, then clears the tape.
    void backward(const Tensor& loss);
    void clear() { nodes_.clear(); }

private:
    std::vector<TapeNode> nodes_;
    Tape* previous_ = nullptr;
};

/// Suspends recording on this thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    Tape* saved_;
};

/// backward() on the thread's active tape.
void backward(const Tensor& loss);

/// Result of comparing tape gradients against central differences.
struct GradCheckReport {
    double max_rel_error = 0.0;  // max |g_tape - g_fd| / max(|g_tape|_inf, |g_fd|_inf)
    double max_abs_error = 0.0;
    std::size_t elements_checked = 0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Checks d fn() / d wrt against central differences with step `step`.
/// `fn` must rebuild its result from the current contents of the `wrt` tensors
/// and return a scalar. The error is normwise-relative per checked tensor.
GradCheckReport grad_check(const std::function<Tensor()>& fn, std::span<const Tensor> wrt,
                           double tolerance, double step = 1e-5);

/// Single-input convenience form.
GradCheckReport grad_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& input,
                           double tolerance, double step = 1e-5);

}  // namespace revive
