#pragma once

#include <optional>

#include "revive/tensor.hpp"

namespace revive {

// Differentiable primitives. All take and return NCHW tensors, record onto the
// active Tape when an input requires gradients, and throw NumericError if they
// would produce a non-finite value.

struct Conv2dOptions {
    int stride = 1;
    int dilation = 1;
    int groups = 1;
    /// Symmetric zero padding; nullopt selects "same" padding.
    std::optional<int> padding;
};

/// Cross-correlation. kernel: (out_c, in_c / groups, kh, kw); bias: (1, out_c, 1, 1)
/// or an undefined Tensor.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const Conv2dOptions& options = {});

/// Depthwise 3x3 "same" convolution. kernel: (m*C, 1, 3, 3) with channel
/// multiplier m; output channel k reads input channel k / m.
Tensor depthwise_conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias = {},
                        int dilation = 1);

/// Normalizes each batch item over (C, H, W), then applies optional per-channel
/// scale/shift of shape (1, C, 1, 1).
Tensor layer_norm(const Tensor& input, const Tensor& scale, const Tensor& shift, double eps);

/// Splits channels into halves (a, b) and returns a * b.
Tensor simple_gate(const Tensor& input);

/// Simplified channel attention: input * (Conv1x1(GAP over H, W) + bias).
Tensor sca(const Tensor& input, const Tensor& weight, const Tensor& bias = {});

enum class PoolKind {
    AvgOverChannels,  // (N, 1, H, W)
    MaxOverChannels,  // (N, 1, H, W)
    AvgOverSpace,     // (N, C, 1, 1)
};
Tensor pool_reduce(const Tensor& input, PoolKind kind);

// Elementwise binary ops. Besides equal shapes, an operand may be a channel
// vector (N|1, C, 1, 1) or a spatial map (N|1, 1, H, W); everything else throws.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);
Tensor softplus(const Tensor& x);
/// sqrt(x + eps)
Tensor sqrt_eps(const Tensor& x, double eps);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);
/// 1 - x
Tensor one_minus(const Tensor& x);

/// Bilinear 2x upsampling (half-pixel centers, edge clamp).
Tensor interp2x_up(const Tensor& x);
/// 2x downsampling by 2x2 averaging; H and W must be even.
Tensor interp2x_down(const Tensor& x);

Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

enum class PointwiseOp { Add, Mul, Sigmoid, Relu, Interp2xUp, Interp2xDown };
/// Dispatcher over the pointwise family; `other` is ignored by unary kinds.
Tensor pointwise(const Tensor& input, const Tensor& other, PointwiseOp op);

/// Soft per-channel histogram with triangular kernels supported on one bin
/// each over [0, 1], normalized to unit mass. Output shape (N, C, 1, bins).
Tensor soft_histogram(const Tensor& x, int bins);

}  // namespace revive
