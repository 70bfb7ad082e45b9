#pragma once

#include <cstddef>
#include <vector>

#include "revive/tensor.hpp"

namespace revive::loss {

struct CannyParams {
    double sigma = 1.0;
    double t_low = 0.1;
    double t_high = 0.2;

    /// Gaussian radius ceil(3 sigma).
    int radius() const;
    void validate() const;
};

/// Rec. 601 luminance. (N, 3, H, W) -> (N, 1, H, W); single-channel input is
/// returned as a copy. Not differentiable; see luminance_op for the taped form.
Tensor luminance(const Tensor& image);

/// Binary Canny edge map, (N, 1, H, W) with values in {0, 1}.
///
/// Luminance is centered at 0.5 before filtering so that an intensity-inverted
/// image has exactly negated gradients. Gaussian smoothing is separable with a
/// replicated border; the Sobel magnitude is divided by 4 sqrt(2) so that it
/// lies in [0, 1] for images in [0, 1]. Directions are quantized to four
/// sectors, non-maximum suppression treats out-of-image neighbours as 0, and
/// hysteresis grows strong edges through 8-connected weak pixels.
/// Throws ShapeError if the image is smaller than the Gaussian kernel.
Tensor canny(const Tensor& image, const CannyParams& params = {});

/// Intermediate planes for a single-channel H x W image, row-major.
struct CannyStages {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> blurred;
    std::vector<double> gx;
    std::vector<double> gy;
    std::vector<double> magnitude;
    std::vector<unsigned char> suppressed;  // NMS survivors
    std::vector<unsigned char> edges;
};

/// Runs the detector on one luminance plane (already centered or not; no
/// offset is applied here).
CannyStages canny_plane(const std::vector<double>& plane, std::size_t height, std::size_t width,
                        const CannyParams& params);

}  // namespace revive::loss
