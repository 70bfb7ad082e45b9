#include "revive/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "revive/errors.hpp"
#include "revive/rng.hpp"

namespace revive {

std::string to_string(const Shape& s) {
    std::ostringstream os;
    os << '(' << s.n << ", " << s.c << ", " << s.h << ", " << s.w << ')';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill) : impl_(std::make_shared<detail::TensorImpl>()) {
    impl_->shape = shape;
    impl_->data.assign(shape.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : impl_(std::make_shared<detail::TensorImpl>()) {
    if (values.size() != shape.numel()) {
        throw ShapeError("tensor: " + std::to_string(values.size()) + " values for shape " +
                         to_string(shape));
    }
    impl_->shape = shape;
    impl_->data = std::move(values);
}

Tensor Tensor::randn(Shape shape, Rng& rng, double stddev) {
    Tensor t(shape);
    for (double& v : t.impl_->data) v = stddev * rng.normal();
    return t;
}

Tensor Tensor::uniform(Shape shape, Rng& rng, double lo, double hi) {
    Tensor t(shape);
    for (double& v : t.impl_->data) v = rng.uniform(lo, hi);
    return t;
}

Tensor Tensor::wrap(std::shared_ptr<detail::TensorImpl> impl) {
    Tensor t;
    t.impl_ = std::move(impl);
    return t;
}

namespace {
const detail::TensorImpl& checked(const std::shared_ptr<detail::TensorImpl>& impl) {
    if (!impl) throw ShapeError("tensor: use of an undefined tensor");
    return *impl;
}
}  // namespace

const Shape& Tensor::shape() const { return checked(impl_).shape; }

std::span<const double> Tensor::data() const { return checked(impl_).data; }

std::span<double> Tensor::mutable_data() {
    checked(impl_);
    return impl_->data;
}

double Tensor::item() const {
    if (numel() != 1) throw ShapeError("item: tensor of shape " + to_string(shape()));
    return impl_->data[0];
}

bool Tensor::requires_grad() const { return checked(impl_).requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
    if (!checked(impl_).is_leaf) throw ShapeError("set_requires_grad: not a leaf tensor");
    impl_->requires_grad = on;
    return *this;
}

bool Tensor::is_leaf() const { return checked(impl_).is_leaf; }

bool Tensor::has_grad() const { return !checked(impl_).grad.empty(); }

Tensor Tensor::grad() const {
    const auto& impl = checked(impl_);
    if (impl.grad.empty()) return Tensor(impl.shape, 0.0);
    return Tensor(impl.shape, impl.grad);
}

void Tensor::zero_grad() {
    checked(impl_);
    impl_->grad.clear();
}

Tensor Tensor::clone() const {
    const auto& impl = checked(impl_);
    return Tensor(impl.shape, impl.data);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("max_abs_diff: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
    double m = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    auto x = a.data();
    auto y = b.data();
    return std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

}  // namespace revive
