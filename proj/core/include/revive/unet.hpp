#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "revive/blocks.hpp"
#include "revive/tensor.hpp"

namespace revive::nn {

/// U-shaped denoiser built from stacked C2FBlocks. Level l runs at
/// base_channels * 2^l channels and resolution H / 2^l; the bottleneck sits at
/// level `depth`.
struct NetworkSpec {
    int depth = 3;
    int base_channels = 16;
    int blocks_per_level = 1;
    int time_embed_dim = 16;
    int image_channels = 3;
    double ln_eps = 1e-6;
    int coarse_group_width = 4;

    int channels_at(int level) const { return base_channels << level; }
    BlockSpec block_spec(int level) const;
    /// Throws if the configuration cannot build a network.
    void validate() const;
};

struct UNetWeights {
    Tensor head_kernel, head_bias;            // 3x3: (C0, 2 * image_channels) -> C0
    Tensor time_kernel, time_bias;            // 1x1: D -> D
    std::vector<Tensor> level_time_kernels;   // per level 0..depth: D -> C_l
    std::vector<Tensor> level_time_biases;
    std::vector<std::vector<C2FBlockWeights>> encoder;  // [level][block]
    std::vector<Tensor> down_kernels, down_biases;      // C_l -> C_{l+1}
    std::vector<C2FBlockWeights> middle;
    std::vector<Tensor> up_kernels, up_biases;          // C_{l+1} -> C_l
    std::vector<std::vector<C2FBlockWeights>> decoder;  // [level][block]
    Tensor tail_kernel, tail_bias;            // 3x3: C0 -> image_channels

    static UNetWeights init(const NetworkSpec& spec, std::uint64_t seed);
    ParamList parameters() const;
};

/// Sinusoidal embedding of integer time steps, shape (N, dim, 1, 1).
Tensor time_embedding(std::span<const int> t, int dim);

/// Conditional forward pass. Input is the channel concatenation of the current
/// state y_t and the degraded image; t holds one step index per batch item (or a
/// single index for all). Returns a field of the same shape as y_t.
Tensor unet_forward(const NetworkSpec& spec, const UNetWeights& weights, const Tensor& y_t,
                    const Tensor& degraded, std::span<const int> t);
Tensor unet_forward(const NetworkSpec& spec, const UNetWeights& weights, const Tensor& y_t,
                    const Tensor& degraded, int t);

}  // namespace revive::nn
