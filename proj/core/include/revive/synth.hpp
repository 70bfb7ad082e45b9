#pragma once

#include <cstdint>
#include <string>

#include "revive/tensor.hpp"

namespace revive::synth {

enum class Degradation { LowLight, Haze, Rain };

std::string to_string(Degradation tag);
Degradation parse_degradation(const std::string& name);

struct ImagePair {
    Tensor degraded;
    Tensor reference;
    Degradation tag = Degradation::LowLight;
    std::uint64_t seed = 0;
};

/// Piecewise-smooth RGB test scene, (1, 3, H, W) with values in [0.05, 0.95]:
/// a vertical two-colour gradient with a few rectangles and discs, overlaid
/// with a low-frequency sinusoidal texture.
Tensor synthetic_scene(std::size_t height, std::size_t width, std::uint64_t seed);

/// clamp((gain * img)^gamma + N(0, noise_std^2)).
ImagePair degrade_lowlight(const Tensor& img, double gain, double gamma, double noise_std,
                           std::uint64_t seed);

/// Atmospheric scattering I = J t + A (1 - t) before clamping.
Tensor haze_model(const Tensor& img, double transmission, double airlight);
ImagePair degrade_haze(const Tensor& img, double transmission, double airlight);

/// Additive streak layer, identical across channels, before clamping.
/// angle_deg is measured from vertical.
Tensor rain_layer(std::size_t height, std::size_t width, int streak_count, double angle_deg,
                  double intensity, std::uint64_t seed);
ImagePair degrade_rain(const Tensor& img, int streak_count, double angle_deg, double intensity,
                       std::uint64_t seed);

/// "<tag>_<seed>"; files are written as <stem>_deg.ppm and <stem>_ref.ppm.
std::string file_stem(Degradation tag, std::uint64_t seed);

Tensor clamp01(const Tensor& img);

}  // namespace revive::synth
