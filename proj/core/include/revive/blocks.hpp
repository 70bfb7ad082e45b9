#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "revive/tensor.hpp"

namespace revive {
class Rng;
}

namespace revive::nn {

/// Named trainable tensors, in a stable order (checkpoint and optimizer order).
using ParamList = std::vector<std::pair<std::string, Tensor>>;

struct BlockSpec {
    int channels = 16;
    std::array<int, 3> dilations{2, 4, 8};
    double ln_eps = 1e-6;
    /// Channels per group in the dilated convolutions; channels must divide by it.
    int coarse_group_width = 4;

    int coarse_groups() const;
    /// Checks channel parity, group divisibility and positive dilations.
    void validate() const;
};

/// Fine branch: DWConv(LayerNorm(alpha1 * x + beta1)) -> SimpleGate -> SCA, plus residual.
struct FineWeights {
    Tensor alpha1, beta1;          // (1, C, 1, 1)
    Tensor dw_kernel, dw_bias;     // (2C, 1, 3, 3), (1, 2C, 1, 1)
    Tensor sca_weight, sca_bias;   // (C, C, 1, 1), (1, C, 1, 1)
};

/// Three grouped dilated 3x3 convolutions, no bias.
struct CoarseWeights {
    std::array<Tensor, 3> kernels;  // (C, C / groups, 3, 3)
};

struct MafcWeights {
    Tensor spatial_kernel, spatial_bias;  // (1, 2, 7, 7), (1, 1, 1, 1)
    Tensor channel_fc1, channel_b1;       // (C/2, C, 1, 1), (1, C/2, 1, 1)
    Tensor channel_fc2, channel_b2;       // (C, C/2, 1, 1), (1, C, 1, 1)
    Tensor pixel_kernel, pixel_bias;      // (C, C, 1, 1), (1, C, 1, 1)
    Tensor fuse_kernel, fuse_bias;        // (C, C, 1, 1), (1, C, 1, 1)
};

/// Output head: Conv1x1(SG(Conv1x1(LN(alpha2 * fused + beta2)))).
struct OutputWeights {
    Tensor alpha2, beta2;              // (1, C, 1, 1)
    Tensor expand_kernel, expand_bias; // (2C, C, 1, 1), (1, 2C, 1, 1)
    Tensor project_kernel, project_bias; // (C, C, 1, 1), (1, C, 1, 1)
};

struct C2FBlockWeights {
    FineWeights fine;
    CoarseWeights coarse;
    MafcWeights mafc;
    OutputWeights out;

    /// Random initialization with fan-in scaled normals; affine scales start at 1.
    static C2FBlockWeights init(const BlockSpec& spec, Rng& rng);
    void collect(const std::string& prefix, ParamList& params) const;
};

struct CoarseFeatures {
    Tensor f7, f15, f31;
};

/// Intermediate MAFC maps, exposed for tests and probes.
struct MafcTrace {
    Tensor spatial_weight;   // (N, 1, H, W)
    Tensor channel_weight;   // (N, C, 1, 1)
    Tensor gate;             // sigmoid(W_s + W_c), (N, C, H, W)
    Tensor refined_fine;     // pixel-attended fine features
    Tensor mixed;            // refined_fine * gate + coarse * (1 - gate), before the 1x1
    Tensor fused;            // after the fusion 1x1
};

Tensor fine_branch(const Tensor& x, const BlockSpec& spec, const FineWeights& w);
CoarseFeatures coarse_branch(const Tensor& f_fine, const BlockSpec& spec, const CoarseWeights& w);
Tensor mafc_fuse(const Tensor& f_fine, const Tensor& f_coarse, const MafcWeights& w,
                 MafcTrace* trace = nullptr);
/// Full block with residual: x + head(mafc(fine, coarse)).
Tensor c2f_block(const Tensor& x, const BlockSpec& spec, const C2FBlockWeights& w);

// ------------------------------------------------------------ receptive fields

/// Input positions whose perturbation changes the output at the center pixel.
struct Footprint {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> mask;  // row-major, 1 = influences the center output
    std::size_t center_y = 0;
    std::size_t center_x = 0;

    std::size_t count() const;
    /// Side of the bounding square around the set positions (0 if empty).
    std::size_t extent() const;
    /// True when every position inside the bounding box is set.
    bool is_solid() const;
};

/// Perturbs every input pixel (all channels) of a (1, C, H, W) probe and records
/// which ones move the output at the spatial center by more than `threshold`.
Footprint receptive_field_probe(const std::function<Tensor(const Tensor&)>& fn, Shape input_shape,
                                std::uint64_t seed = 7, double threshold = 1e-12);

/// Spatial operator chain of a block: fine DWConv + SimpleGate, then the three
/// dilated stages. stage 0 = fine, 1..3 = coarse outputs.
Tensor spatial_chain(const Tensor& x, const BlockSpec& spec, const C2FBlockWeights& w, int stage);

struct LadderReport {
    std::array<std::size_t, 4> extents{};  // fine path, then the three coarse stages
    std::array<bool, 4> solid{};           // footprint fills its bounding square
};

/// Probes the fine path and the three coarse stages at the center of a square
/// input of side max(probe_size, claimed extent + 2).
LadderReport receptive_field_ladder(const BlockSpec& spec, const C2FBlockWeights& w,
                                    std::size_t probe_size = 0);

/// Ladder expected for a dilation triple: 3, then += 2 * dilation per stage.
std::array<std::size_t, 4> expected_ladder(const std::array<int, 3>& dilations);

}  // namespace revive::nn
