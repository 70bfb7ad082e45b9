#include "revive/blocks.hpp"

#include <algorithm>
#include <cmath>

#include "revive/autodiff.hpp"
#include "revive/errors.hpp"
#include "revive/ops.hpp"
#include "revive/rng.hpp"

namespace revive::nn {

namespace {

constexpr Conv2dOptions kPointwise{.padding = 0};

Tensor affine_param(std::size_t c, double value) { return Tensor(Shape{1, c, 1, 1}, value); }

Tensor kernel_param(Rng& rng, std::size_t out_c, std::size_t in_c, std::size_t kh, std::size_t kw,
                    double gain = 1.0) {
    const double fan_in = static_cast<double>(in_c * kh * kw);
    return Tensor::randn(Shape{out_c, in_c, kh, kw}, rng, gain / std::sqrt(fan_in));
}

}  // namespace

int BlockSpec::coarse_groups() const { return channels / coarse_group_width; }

void BlockSpec::validate() const {
    if (channels <= 0 || channels % 2 != 0) {
        throw ShapeError("BlockSpec: channels must be positive and even, got " +
                         std::to_string(channels));
    }
    if (coarse_group_width <= 0 || channels % coarse_group_width != 0) {
        throw ShapeError("BlockSpec: coarse_group_width must divide channels");
    }
    for (int d : dilations) {
        if (d <= 0) throw DomainError("BlockSpec: dilations must be positive");
    }
    if (!(ln_eps > 0.0)) throw DomainError("BlockSpec: ln_eps must be positive");
}

C2FBlockWeights C2FBlockWeights::init(const BlockSpec& spec, Rng& rng) {
    spec.validate();
    const auto c = static_cast<std::size_t>(spec.channels);
    const auto width = static_cast<std::size_t>(spec.coarse_group_width);
    C2FBlockWeights w;
    w.fine.alpha1 = affine_param(c, 1.0);
    w.fine.beta1 = affine_param(c, 0.0);
    w.fine.dw_kernel = kernel_param(rng, 2 * c, 1, 3, 3);
    w.fine.dw_bias = affine_param(2 * c, 0.0);
    w.fine.sca_weight = kernel_param(rng, c, c, 1, 1);
    w.fine.sca_bias = affine_param(c, 0.0);

    for (auto& k : w.coarse.kernels) k = kernel_param(rng, c, width, 3, 3);

    w.mafc.spatial_kernel = kernel_param(rng, 1, 2, 7, 7);
    w.mafc.spatial_bias = affine_param(1, 0.0);
    w.mafc.channel_fc1 = kernel_param(rng, c / 2, c, 1, 1);
    w.mafc.channel_b1 = affine_param(c / 2, 0.0);
    w.mafc.channel_fc2 = kernel_param(rng, c, c / 2, 1, 1);
    w.mafc.channel_b2 = affine_param(c, 0.0);
    w.mafc.pixel_kernel = kernel_param(rng, c, c, 1, 1);
    w.mafc.pixel_bias = affine_param(c, 0.0);
    w.mafc.fuse_kernel = kernel_param(rng, c, c, 1, 1);
    w.mafc.fuse_bias = affine_param(c, 0.0);

    w.out.alpha2 = affine_param(c, 1.0);
    w.out.beta2 = affine_param(c, 0.0);
    w.out.expand_kernel = kernel_param(rng, 2 * c, c, 1, 1);
    w.out.expand_bias = affine_param(2 * c, 0.0);
    w.out.project_kernel = kernel_param(rng, c, c, 1, 1, 0.5);
    w.out.project_bias = affine_param(c, 0.0);
    return w;
}

void C2FBlockWeights::collect(const std::string& prefix, ParamList& params) const {
    auto add = [&](const char* name, const Tensor& t) { params.emplace_back(prefix + name, t); };
    add("fine.alpha1", fine.alpha1);
    add("fine.beta1", fine.beta1);
    add("fine.dw_kernel", fine.dw_kernel);
    add("fine.dw_bias", fine.dw_bias);
    add("fine.sca_weight", fine.sca_weight);
    add("fine.sca_bias", fine.sca_bias);
    add("coarse.k0", coarse.kernels[0]);
    add("coarse.k1", coarse.kernels[1]);
    add("coarse.k2", coarse.kernels[2]);
    add("mafc.spatial_kernel", mafc.spatial_kernel);
    add("mafc.spatial_bias", mafc.spatial_bias);
    add("mafc.channel_fc1", mafc.channel_fc1);
    add("mafc.channel_b1", mafc.channel_b1);
    add("mafc.channel_fc2", mafc.channel_fc2);
    add("mafc.channel_b2", mafc.channel_b2);
    add("mafc.pixel_kernel", mafc.pixel_kernel);
    add("mafc.pixel_bias", mafc.pixel_bias);
    add("mafc.fuse_kernel", mafc.fuse_kernel);
    add("mafc.fuse_bias", mafc.fuse_bias);
    add("out.alpha2", out.alpha2);
    add("out.beta2", out.beta2);
    add("out.expand_kernel", out.expand_kernel);
    add("out.expand_bias", out.expand_bias);
    add("out.project_kernel", out.project_kernel);
    add("out.project_bias", out.project_bias);
}

Tensor fine_branch(const Tensor& x, const BlockSpec& spec, const FineWeights& w) {
    spec.validate();
    if (x.shape().c != static_cast<std::size_t>(spec.channels)) {
        throw ShapeError("fine_branch: input " + to_string(x.shape()) + " for " +
                         std::to_string(spec.channels) + " channels");
    }
    const Tensor modulated = add(mul(x, w.alpha1), w.beta1);
    const Tensor normed = layer_norm(modulated, {}, {}, spec.ln_eps);
    const Tensor widened = depthwise_conv2d(normed, w.dw_kernel, w.dw_bias);
    const Tensor gated = simple_gate(widened);
    return add(x, sca(gated, w.sca_weight, w.sca_bias));
}

CoarseFeatures coarse_branch(const Tensor& f_fine, const BlockSpec& spec, const CoarseWeights& w) {
    spec.validate();
    CoarseFeatures out;
    std::array<Tensor*, 3> stages{&out.f7, &out.f15, &out.f31};
    Tensor current = f_fine;
    for (std::size_t i = 0; i < 3; ++i) {
        Conv2dOptions opt;
        opt.dilation = spec.dilations[i];
        opt.groups = spec.coarse_groups();
        current = conv2d(current, w.kernels[i], {}, opt);
        *stages[i] = current;
    }
    return out;
}

Tensor mafc_fuse(const Tensor& f_fine, const Tensor& f_coarse, const MafcWeights& w,
                 MafcTrace* trace) {
    if (f_fine.shape() != f_coarse.shape()) {
        throw ShapeError("mafc_fuse: fine " + to_string(f_fine.shape()) + " vs coarse " +
                         to_string(f_coarse.shape()));
    }
    const Tensor c2f = add(f_coarse, f_fine);

    const Tensor pooled = concat_channels(pool_reduce(c2f, PoolKind::AvgOverChannels),
                                          pool_reduce(c2f, PoolKind::MaxOverChannels));
    const Tensor spatial_weight = conv2d(pooled, w.spatial_kernel, w.spatial_bias);

    const Tensor hidden =
        relu(conv2d(pool_reduce(c2f, PoolKind::AvgOverSpace), w.channel_fc1, w.channel_b1,
                    kPointwise));
    const Tensor channel_weight = conv2d(hidden, w.channel_fc2, w.channel_b2, kPointwise);

    const Tensor gate = sigmoid(add(spatial_weight, channel_weight));
    const Tensor refined =
        mul(sigmoid(conv2d(f_fine, w.pixel_kernel, w.pixel_bias, kPointwise)), f_fine);
    const Tensor mixed = add(mul(refined, gate), mul(f_coarse, one_minus(gate)));
    const Tensor fused = conv2d(mixed, w.fuse_kernel, w.fuse_bias, kPointwise);

    if (trace != nullptr) {
        *trace = MafcTrace{spatial_weight, channel_weight, gate, refined, mixed, fused};
    }
    return fused;
}

Tensor c2f_block(const Tensor& x, const BlockSpec& spec, const C2FBlockWeights& w) {
    const Tensor f_fine = fine_branch(x, spec, w.fine);
    const Tensor f_coarse = coarse_branch(f_fine, spec, w.coarse).f31;
    const Tensor fused = mafc_fuse(f_fine, f_coarse, w.mafc);
    const Tensor normed =
        layer_norm(add(mul(fused, w.out.alpha2), w.out.beta2), {}, {}, spec.ln_eps);
    const Tensor expanded = conv2d(normed, w.out.expand_kernel, w.out.expand_bias, kPointwise);
    const Tensor projected =
        conv2d(simple_gate(expanded), w.out.project_kernel, w.out.project_bias, kPointwise);
    return add(x, projected);
}

// ------------------------------------------------------------ receptive fields

std::size_t Footprint::count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

namespace {
struct Box {
    std::size_t y0, y1, x0, x1;  // inclusive
    bool empty;
};

Box bounding_box(const Footprint& f) {
    Box b{f.height, 0, f.width, 0, true};
    for (std::size_t y = 0; y < f.height; ++y)
        for (std::size_t x = 0; x < f.width; ++x) {
            if (!f.mask[y * f.width + x]) continue;
            b.empty = false;
            b.y0 = std::min(b.y0, y);
            b.y1 = std::max(b.y1, y);
            b.x0 = std::min(b.x0, x);
            b.x1 = std::max(b.x1, x);
        }
    return b;
}
}  // namespace

std::size_t Footprint::extent() const {
    const Box b = bounding_box(*this);
    if (b.empty) return 0;
    return std::max(b.y1 - b.y0 + 1, b.x1 - b.x0 + 1);
}

bool Footprint::is_solid() const {
    const Box b = bounding_box(*this);
    if (b.empty) return false;
    for (std::size_t y = b.y0; y <= b.y1; ++y)
        for (std::size_t x = b.x0; x <= b.x1; ++x)
            if (!mask[y * width + x]) return false;
    return true;
}

Footprint receptive_field_probe(const std::function<Tensor(const Tensor&)>& fn, Shape input_shape,
                                std::uint64_t seed, double threshold) {
    if (input_shape.n != 1 || input_shape.h == 0 || input_shape.w == 0) {
        throw ShapeError("receptive_field_probe: expects a (1, C, H, W) probe shape");
    }
    NoGradGuard no_grad;
    Rng rng(seed);
    const Tensor base = Tensor::uniform(input_shape, rng, -1.0, 1.0);
    const Tensor reference = fn(base);
    const Shape out_shape = reference.shape();
    if (out_shape.h != input_shape.h || out_shape.w != input_shape.w) {
        throw ShapeError("receptive_field_probe: fn must preserve the spatial size");
    }

    Footprint fp;
    fp.height = input_shape.h;
    fp.width = input_shape.w;
    fp.center_y = input_shape.h / 2;
    fp.center_x = input_shape.w / 2;
    fp.mask.assign(fp.height * fp.width, 0);

    for (std::size_t y = 0; y < fp.height; ++y)
        for (std::size_t x = 0; x < fp.width; ++x) {
            Tensor probe = base.clone();
            for (std::size_t c = 0; c < input_shape.c; ++c) probe.at(0, c, y, x) += 1.0;
            const Tensor out = fn(probe);
            for (std::size_t c = 0; c < out_shape.c; ++c) {
                const double delta = std::abs(out.at(0, c, fp.center_y, fp.center_x) -
                                              reference.at(0, c, fp.center_y, fp.center_x));
                if (delta > threshold) {
                    fp.mask[y * fp.width + x] = 1;
                    break;
                }
            }
        }
    return fp;
}

Tensor spatial_chain(const Tensor& x, const BlockSpec& spec, const C2FBlockWeights& w, int stage) {
    if (stage < 0 || stage > 3) throw DomainError("spatial_chain: stage must be in [0, 3]");
    Tensor current = simple_gate(depthwise_conv2d(x, w.fine.dw_kernel, w.fine.dw_bias));
    for (int i = 0; i < stage; ++i) {
        Conv2dOptions opt;
        opt.dilation = spec.dilations[static_cast<std::size_t>(i)];
        opt.groups = spec.coarse_groups();
        current = conv2d(current, w.coarse.kernels[static_cast<std::size_t>(i)], {}, opt);
    }
    return current;
}

std::array<std::size_t, 4> expected_ladder(const std::array<int, 3>& dilations) {
    std::array<std::size_t, 4> ladder{3, 0, 0, 0};
    for (std::size_t i = 0; i < 3; ++i) {
        ladder[i + 1] = ladder[i] + 2 * static_cast<std::size_t>(dilations[i]);
    }
    return ladder;
}

LadderReport receptive_field_ladder(const BlockSpec& spec, const C2FBlockWeights& w,
                                    std::size_t probe_size) {
    spec.validate();
    const std::size_t claimed = std::max<std::size_t>(expected_ladder(spec.dilations)[3], 31);
    const std::size_t size = std::max(probe_size, claimed + 2);
    const Shape shape{1, static_cast<std::size_t>(spec.channels), size, size};
    LadderReport report;
    for (int stage = 0; stage < 4; ++stage) {
        const Footprint fp = receptive_field_probe(
            [&](const Tensor& x) { return spatial_chain(x, spec, w, stage); }, shape);
        report.extents[static_cast<std::size_t>(stage)] = fp.extent();
        report.solid[static_cast<std::size_t>(stage)] = fp.is_solid();
    }
    return report;
}

}  // namespace revive::nn
