#include "revive/unet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "revive/errors.hpp"
#include "revive/ops.hpp"
#include "revive/rng.hpp"

namespace revive::nn {

namespace {

constexpr Conv2dOptions kPointwise{.padding = 0};

Tensor bias_param(int c) { return Tensor(Shape{1, static_cast<std::size_t>(c), 1, 1}, 0.0); }

Tensor kernel_param(Rng& rng, int out_c, int in_c, int k, double gain = 1.0) {
    const double fan_in = static_cast<double>(in_c * k * k);
    return Tensor::randn(Shape{static_cast<std::size_t>(out_c), static_cast<std::size_t>(in_c),
                               static_cast<std::size_t>(k), static_cast<std::size_t>(k)},
                         rng, gain / std::sqrt(fan_in));
}

}  // namespace

BlockSpec NetworkSpec::block_spec(int level) const {
    BlockSpec b;
    b.channels = channels_at(level);
    b.ln_eps = ln_eps;
    b.coarse_group_width = coarse_group_width;
    return b;
}

void NetworkSpec::validate() const {
    if (depth < 0 || depth > 6) throw DomainError("NetworkSpec: depth must be in [0, 6]");
    if (base_channels <= 0 || base_channels % 2 != 0) {
        throw DomainError("NetworkSpec: base_channels must be positive and even");
    }
    if (blocks_per_level < 1) throw DomainError("NetworkSpec: blocks_per_level must be >= 1");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
        throw DomainError("NetworkSpec: time_embed_dim must be even and >= 2");
    }
    if (image_channels < 1) throw DomainError("NetworkSpec: image_channels must be >= 1");
    for (int l = 0; l <= depth; ++l) {
        const BlockSpec b = block_spec(l);
        b.validate();
        if (b.dilations != std::array<int, 3>{2, 4, 8}) {
            throw DomainError("NetworkSpec: C2FBlock dilations must be (2, 4, 8)");
        }
    }
}

UNetWeights UNetWeights::init(const NetworkSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    const int c0 = spec.base_channels;
    const int d = spec.time_embed_dim;
    UNetWeights w;
    w.head_kernel = kernel_param(rng, c0, 2 * spec.image_channels, 3);
    w.head_bias = bias_param(c0);
    w.time_kernel = kernel_param(rng, d, d, 1);
    w.time_bias = bias_param(d);
    for (int l = 0; l <= spec.depth; ++l) {
        w.level_time_kernels.push_back(kernel_param(rng, spec.channels_at(l), d, 1, 0.1));
        w.level_time_biases.push_back(bias_param(spec.channels_at(l)));
    }
    w.encoder.resize(static_cast<std::size_t>(spec.depth));
    w.decoder.resize(static_cast<std::size_t>(spec.depth));
    for (int l = 0; l < spec.depth; ++l) {
        const BlockSpec b = spec.block_spec(l);
        for (int i = 0; i < spec.blocks_per_level; ++i) {
            w.encoder[static_cast<std::size_t>(l)].push_back(C2FBlockWeights::init(b, rng));
        }
        w.down_kernels.push_back(kernel_param(rng, spec.channels_at(l + 1), spec.channels_at(l), 1));
        w.down_biases.push_back(bias_param(spec.channels_at(l + 1)));
    }
    for (int i = 0; i < spec.blocks_per_level; ++i) {
        w.middle.push_back(C2FBlockWeights::init(spec.block_spec(spec.depth), rng));
    }
    for (int l = 0; l < spec.depth; ++l) {
        w.up_kernels.push_back(kernel_param(rng, spec.channels_at(l), spec.channels_at(l + 1), 1));
        w.up_biases.push_back(bias_param(spec.channels_at(l)));
        const BlockSpec b = spec.block_spec(l);
        for (int i = 0; i < spec.blocks_per_level; ++i) {
            w.decoder[static_cast<std::size_t>(l)].push_back(C2FBlockWeights::init(b, rng));
        }
    }
    // Residual branches and the output head start at zero, so the initial
    // network is the identity on its residual stream and predicts y0 = mu.
    auto zero_projection = [](C2FBlockWeights& b) {
        b.out.project_kernel = Tensor::zeros(b.out.project_kernel.shape());
    };
    for (auto& level : w.encoder) std::ranges::for_each(level, zero_projection);
    for (auto& level : w.decoder) std::ranges::for_each(level, zero_projection);
    std::ranges::for_each(w.middle, zero_projection);
    w.tail_kernel = Tensor::zeros(Shape{static_cast<std::size_t>(spec.image_channels),
                                        static_cast<std::size_t>(c0), 3, 3});
    w.tail_bias = bias_param(spec.image_channels);
    return w;
}

ParamList UNetWeights::parameters() const {
    ParamList p;
    p.emplace_back("head.kernel", head_kernel);
    p.emplace_back("head.bias", head_bias);
    p.emplace_back("time.kernel", time_kernel);
    p.emplace_back("time.bias", time_bias);
    for (std::size_t l = 0; l < level_time_kernels.size(); ++l) {
        p.emplace_back("time.level" + std::to_string(l) + ".kernel", level_time_kernels[l]);
        p.emplace_back("time.level" + std::to_string(l) + ".bias", level_time_biases[l]);
    }
    for (std::size_t l = 0; l < encoder.size(); ++l) {
        for (std::size_t i = 0; i < encoder[l].size(); ++i) {
            encoder[l][i].collect("enc" + std::to_string(l) + "." + std::to_string(i) + ".", p);
        }
        p.emplace_back("down" + std::to_string(l) + ".kernel", down_kernels[l]);
        p.emplace_back("down" + std::to_string(l) + ".bias", down_biases[l]);
    }
    for (std::size_t i = 0; i < middle.size(); ++i) {
        middle[i].collect("mid." + std::to_string(i) + ".", p);
    }
    for (std::size_t l = 0; l < decoder.size(); ++l) {
        p.emplace_back("up" + std::to_string(l) + ".kernel", up_kernels[l]);
        p.emplace_back("up" + std::to_string(l) + ".bias", up_biases[l]);
        for (std::size_t i = 0; i < decoder[l].size(); ++i) {
            decoder[l][i].collect("dec" + std::to_string(l) + "." + std::to_string(i) + ".", p);
        }
    }
    p.emplace_back("tail.kernel", tail_kernel);
    p.emplace_back("tail.bias", tail_bias);
    return p;
}

Tensor time_embedding(std::span<const int> t, int dim) {
    if (dim < 2 || dim % 2 != 0) throw DomainError("time_embedding: dim must be even");
    const std::size_t half = static_cast<std::size_t>(dim) / 2;
    Tensor emb(Shape{t.size(), static_cast<std::size_t>(dim), 1, 1});
    auto out = emb.mutable_data();
    for (std::size_t n = 0; n < t.size(); ++n) {
        for (std::size_t i = 0; i < half; ++i) {
            const double freq =
                std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
            const double arg = static_cast<double>(t[n]) * freq;
            out[n * static_cast<std::size_t>(dim) + i] = std::sin(arg);
            out[n * static_cast<std::size_t>(dim) + half + i] = std::cos(arg);
        }
    }
    return emb;
}

Tensor unet_forward(const NetworkSpec& spec, const UNetWeights& w, const Tensor& y_t,
                    const Tensor& degraded, std::span<const int> t) {
    spec.validate();
    const Shape s = y_t.shape();
    if (degraded.shape() != s) {
        throw ShapeError("unet_forward: y_t " + to_string(s) + " vs degraded " +
                         to_string(degraded.shape()));
    }
    if (s.c != static_cast<std::size_t>(spec.image_channels)) {
        throw ShapeError("unet_forward: expected " + std::to_string(spec.image_channels) +
                         " image channels, got " + to_string(s));
    }
    const std::size_t factor = std::size_t{1} << spec.depth;
    if (s.h % factor != 0 || s.w % factor != 0) {
        throw ShapeError("unet_forward: spatial dims of " + to_string(s) +
                         " not divisible by 2^depth = " + std::to_string(factor));
    }
    std::vector<int> steps(t.begin(), t.end());
    if (steps.size() == 1 && s.n > 1) steps.assign(s.n, steps[0]);
    if (steps.size() != s.n) throw ShapeError("unet_forward: need one time index per batch item");

    const Tensor temb = relu(conv2d(time_embedding(steps, spec.time_embed_dim), w.time_kernel,
                                    w.time_bias, kPointwise));
    auto level_bias = [&](int l) {
        return conv2d(temb, w.level_time_kernels[static_cast<std::size_t>(l)],
                      w.level_time_biases[static_cast<std::size_t>(l)], kPointwise);
    };

    Tensor h = conv2d(concat_channels(y_t, degraded), w.head_kernel, w.head_bias);
    std::vector<Tensor> skips;
    for (int l = 0; l < spec.depth; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const BlockSpec b = spec.block_spec(l);
        h = add(h, level_bias(l));
        for (const auto& block : w.encoder[lu]) h = c2f_block(h, b, block);
        skips.push_back(h);
        h = conv2d(interp2x_down(h), w.down_kernels[lu], w.down_biases[lu], kPointwise);
    }
    h = add(h, level_bias(spec.depth));
    for (const auto& block : w.middle) h = c2f_block(h, spec.block_spec(spec.depth), block);
    for (int l = spec.depth - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const BlockSpec b = spec.block_spec(l);
        h = conv2d(interp2x_up(h), w.up_kernels[lu], w.up_biases[lu], kPointwise);
        h = add(h, skips[lu]);
        for (const auto& block : w.decoder[lu]) h = c2f_block(h, b, block);
    }
    return conv2d(h, w.tail_kernel, w.tail_bias);
}

Tensor unet_forward(const NetworkSpec& spec, const UNetWeights& weights, const Tensor& y_t,
                    const Tensor& degraded, int t) {
    return unet_forward(spec, weights, y_t, degraded, std::span<const int>(&t, 1));
}

}  // namespace revive::nn
