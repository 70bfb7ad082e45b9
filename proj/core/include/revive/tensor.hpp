#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace revive {

class Rng;

/// NCHW extent. Every tensor in the library is four-dimensional; scalars are 1x1x1x1.
struct Shape {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    constexpr std::size_t numel() const { return n * c * h * w; }
    constexpr std::size_t plane() const { return h * w; }
    constexpr bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);

namespace detail {
struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until a backward pass writes to it
    bool requires_grad = false;
    bool is_leaf = true;
};
}  // namespace detail

/// Dense NCHW array of doubles with optional participation in a gradient tape.
///
/// Copies share storage (handle semantics, like most tensor libraries); use clone()
/// for a deep copy. Operations never modify their inputs; only leaves are mutated,
/// by initializers, optimizers and the finite-difference checker.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor zeros(Shape shape) { return Tensor(shape, 0.0); }
    static Tensor ones(Shape shape) { return Tensor(shape, 1.0); }
    static Tensor full(Shape shape, double value) { return Tensor(shape, value); }
    static Tensor scalar(double value) { return Tensor(Shape{1, 1, 1, 1}, value); }
    static Tensor randn(Shape shape, Rng& rng, double stddev = 1.0);
    static Tensor uniform(Shape shape, Rng& rng, double lo, double hi);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t numel() const { return shape().numel(); }

    std::span<const double> data() const;
    std::span<double> mutable_data();

    std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        const Shape& s = shape();
        return ((n * s.c + c) * s.h + h) * s.w + w;
    }
    double at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
        return data()[offset(n, c, h, w)];
    }
    double& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
        return mutable_data()[offset(n, c, h, w)];
    }
    /// Value of a single-element tensor.
    double item() const;

    bool requires_grad() const;
    /// Marks a leaf as trainable. Throws on non-leaf tensors.
    Tensor& set_requires_grad(bool on = true);
    bool is_leaf() const;

    bool has_grad() const;
    /// Accumulated gradient; all zeros if nothing has been accumulated yet.
    Tensor grad() const;
    void zero_grad();

    /// Deep copy of the values, detached from any tape.
    Tensor clone() const;

    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

    // Internal handle for the autodiff machinery.
    const std::shared_ptr<detail::TensorImpl>& impl() const { return impl_; }
    static Tensor wrap(std::shared_ptr<detail::TensorImpl> impl);

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

/// Bitwise equality of shape and every value.
bool bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace revive
