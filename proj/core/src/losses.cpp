#include "revive/losses.hpp"

#include <algorithm>
#include <cmath>

#include "revive/errors.hpp"
#include "revive/ops.hpp"

namespace revive::loss {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shapes differ, " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
    }
}

double inverse_softplus(double y) { return y + std::log(-std::expm1(-y)); }

double softplus_value(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

void LossWeights::validate() const {
    for (double l : {lambda1, lambda2, lambda3}) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw DomainError("loss weights must be finite and >= 0");
    }
}

LearnedWeights LearnedWeights::from(const LossWeights& initial) {
    initial.validate();
    LearnedWeights out;
    const double values[3] = {initial.lambda1, initial.lambda2, initial.lambda3};
    for (int i = 0; i < 3; ++i) {
        if (values[i] <= 0.0) throw DomainError("learned loss weights must start positive");
        out.rho[i] = Tensor::scalar(inverse_softplus(values[i]));
        out.rho[i].set_requires_grad(true);
    }
    return out;
}

LossWeights LearnedWeights::current() const {
    return {softplus_value(rho[0].item()), softplus_value(rho[1].item()),
            softplus_value(rho[2].item())};
}

double pixel_loss(const Tensor& generated, const Tensor& reference) {
    require_same_shape(generated, reference, "pixel_loss");
    auto a = generated.data();
    auto b = reference.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
}

double edge_loss(const Tensor& generated, const Tensor& reference, const CannyParams& params) {
    require_same_shape(generated, reference, "edge_loss");
    const Tensor e1 = canny(generated, params);
    const Tensor e2 = canny(reference, params);
    auto a = e1.data();
    auto b = e2.data();
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i];
    return static_cast<double>(differ) / static_cast<double>(a.size());
}

std::vector<double> histogram(const Tensor& image, std::size_t item, std::size_t channel, int bins) {
    const Shape s = image.shape();
    if (bins < 1) throw DomainError("histogram: bins must be positive");
    if (item >= s.n || channel >= s.c) throw ShapeError("histogram: index out of range");
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    const std::size_t plane = s.plane();
    const double* p = image.data().data() + (item * s.c + channel) * plane;
    for (std::size_t i = 0; i < plane; ++i) {
        const double v = std::clamp(p[i], 0.0, 1.0);
        const auto k = std::min(static_cast<std::size_t>(std::floor(v * bins)),
                                static_cast<std::size_t>(bins - 1));
        h[k] += 1.0;
    }
    for (double& x : h) x /= static_cast<double>(plane);
    return h;
}

double hist_loss(const Tensor& generated, const Tensor& reference, int bins) {
    require_same_shape(generated, reference, "hist_loss");
    const Shape s = generated.shape();
    double total = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            const auto h1 = histogram(generated, n, c, bins);
            const auto h2 = histogram(reference, n, c, bins);
            for (std::size_t k = 0; k < h1.size(); ++k) total += std::abs(h1[k] - h2[k]);
        }
    }
    return total / static_cast<double>(s.n);
}

double combine(const LossWeights& w, double pixel, double edge, double hist) {
    return w.lambda1 * pixel + w.lambda2 * edge + w.lambda3 * hist;
}

LossReport combined_loss(const Tensor& generated, const Tensor& reference,
                         const LossWeights& weights, const CannyParams& params, int bins) {
    weights.validate();
    LossReport r;
    r.weights = weights;
    r.pixel = pixel_loss(generated, reference);
    r.edge = edge_loss(generated, reference, params);
    r.hist = hist_loss(generated, reference, bins);
    r.combined = combine(weights, r.pixel, r.edge, r.hist);
    return r;
}

Tensor soft_edge_magnitude(const Tensor& image, const CannyParams& params) {
    params.validate();
    const Shape s = image.shape();
    Tensor lum = image;
    if (s.c == 3) {
        lum = conv2d(image, Tensor(Shape{1, 3, 1, 1}, {0.299, 0.587, 0.114}), {});
    } else if (s.c != 1) {
        throw ShapeError("soft_edge_magnitude: expected 1 or 3 channels");
    }
    lum = add_scalar(lum, -0.5);

    const int r = params.radius();
    const std::size_t k = 2 * static_cast<std::size_t>(r) + 1;
    std::vector<double> taps(k);
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        taps[i + r] = std::exp(-(i * i) / (2.0 * params.sigma * params.sigma));
        total += taps[i + r];
    }
    std::vector<double> kernel(k * k);
    for (std::size_t y = 0; y < k; ++y) {
        for (std::size_t x = 0; x < k; ++x) kernel[y * k + x] = taps[y] * taps[x] / (total * total);
    }
    const Tensor blurred = conv2d(lum, Tensor(Shape{1, 1, k, k}, std::move(kernel)), {});
    const Tensor sobel(Shape{2, 1, 3, 3}, {-1, 0, 1, -2, 0, 2, -1, 0, 1,  //
                                           -1, -2, -1, 0, 0, 0, 1, 2, 1});
    const Tensor grads = conv2d(blurred, sobel, {});
    const Tensor energy = scale(pool_reduce(square(grads), PoolKind::AvgOverChannels), 2.0);
    return scale(sqrt_eps(energy, 1e-6), 1.0 / (4.0 * std::sqrt(2.0)));
}

SurrogateTerms surrogate_terms(const Tensor& generated, const Tensor& reference,
                               const CannyParams& params, int bins) {
    require_same_shape(generated, reference, "surrogate_terms");
    SurrogateTerms t;
    t.pixel = mean(abs(sub(generated, reference)));
    t.edge = mean(abs(sub(soft_edge_magnitude(generated, params),
                          soft_edge_magnitude(reference, params))));
    const Tensor h = abs(sub(soft_histogram(generated, bins), soft_histogram(reference, bins)));
    t.hist = scale(sum(h), 1.0 / static_cast<double>(generated.shape().n));
    return t;
}

Tensor surrogate_objective(const SurrogateTerms& t, const LossWeights& w) {
    w.validate();
    return add(add(scale(t.pixel, w.lambda1), scale(t.edge, w.lambda2)), scale(t.hist, w.lambda3));
}

Tensor surrogate_objective(const SurrogateTerms& t, const LearnedWeights& w) {
    return add(add(mul(softplus(w.rho[0]), t.pixel), mul(softplus(w.rho[1]), t.edge)),
               mul(softplus(w.rho[2]), t.hist));
}

}  // namespace revive::loss
