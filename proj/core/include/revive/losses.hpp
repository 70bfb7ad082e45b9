#pragma once

#include <array>
#include <vector>

#include "revive/canny.hpp"
#include "revive/tensor.hpp"

namespace revive::loss {

struct LossWeights {
    double lambda1 = 1.0;  // pixel
    double lambda2 = 0.1;  // edge
    double lambda3 = 0.1;  // histogram
    void validate() const;
};

/// Loss weights parameterized as softplus(rho) so they stay positive while
/// being optimized. Each rho is a 1x1x1x1 leaf.
struct LearnedWeights {
    std::array<Tensor, 3> rho;

    static LearnedWeights from(const LossWeights& initial);
    LossWeights current() const;
};

struct LossReport {
    double pixel = 0.0;
    double edge = 0.0;
    double hist = 0.0;
    double combined = 0.0;
    LossWeights weights;
};

/// Mean absolute error over all elements.
double pixel_loss(const Tensor& generated, const Tensor& reference);

/// Fraction of pixels whose Canny labels differ, averaged over the batch.
double edge_loss(const Tensor& generated, const Tensor& reference, const CannyParams& params = {});

/// Normalized K-bin histogram of one channel of one batch item. Values are
/// clamped to [0, 1]; bin index min(floor(v K), K - 1).
std::vector<double> histogram(const Tensor& image, std::size_t item, std::size_t channel, int bins);

/// Sum over channels of the L1 distance between histograms, averaged over the batch.
double hist_loss(const Tensor& generated, const Tensor& reference, int bins = 64);

/// lambda1 pixel + lambda2 edge + lambda3 hist, evaluated in that order.
double combine(const LossWeights& weights, double pixel, double edge, double hist);

LossReport combined_loss(const Tensor& generated, const Tensor& reference,
                         const LossWeights& weights = {}, const CannyParams& params = {},
                         int bins = 64);

/// Differentiable stand-ins used for training. All are scalar tensors.
struct SurrogateTerms {
    Tensor pixel;  // mean |g - r|
    Tensor edge;   // mean |M(g) - M(r)| with M the blurred Sobel magnitude
    Tensor hist;   // soft-histogram L1, summed over channels, mean over batch
};

/// Blurred, normalized Sobel magnitude of the luminance, (N, 1, H, W).
Tensor soft_edge_magnitude(const Tensor& image, const CannyParams& params = {});

SurrogateTerms surrogate_terms(const Tensor& generated, const Tensor& reference,
                               const CannyParams& params = {}, int bins = 64);

Tensor surrogate_objective(const SurrogateTerms& terms, const LossWeights& weights);
Tensor surrogate_objective(const SurrogateTerms& terms, const LearnedWeights& weights);

}  // namespace revive::loss
