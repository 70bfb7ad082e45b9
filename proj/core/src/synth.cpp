#include "revive/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "revive/errors.hpp"
#include "revive/rng.hpp"

namespace revive::synth {

namespace {

void require_rgb(const Tensor& img, const char* what) {
    const Shape s = img.shape();
    if (s.c != 3 || s.numel() == 0) {
        throw ShapeError(std::string(what) + ": expected an RGB tensor, got " + to_string(s));
    }
}

}  // namespace

std::string to_string(Degradation tag) {
    switch (tag) {
        case Degradation::LowLight: return "lowlight";
        case Degradation::Haze: return "haze";
        case Degradation::Rain: return "rain";
    }
    return "unknown";
}

Degradation parse_degradation(const std::string& name) {
    if (name == "lowlight") return Degradation::LowLight;
    if (name == "haze") return Degradation::Haze;
    if (name == "rain") return Degradation::Rain;
    throw DomainError("unknown degradation '" + name + "' (expected lowlight, haze or rain)");
}

Tensor clamp01(const Tensor& img) {
    Tensor out = img.clone();
    for (double& v : out.mutable_data()) v = std::clamp(v, 0.0, 1.0);
    return out;
}

Tensor synthetic_scene(std::size_t height, std::size_t width, std::uint64_t seed) {
    if (height == 0 || width == 0) throw ShapeError("synthetic_scene: empty size");
    Rng rng(seed);
    auto colour = [&] {
        return std::array<double, 3>{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                                     rng.uniform(0.2, 0.8)};
    };
    Tensor img(Shape{1, 3, height, width});
    const auto top = colour();
    const auto bottom = colour();
    for (std::size_t y = 0; y < height; ++y) {
        const double u = height > 1 ? static_cast<double>(y) / static_cast<double>(height - 1) : 0.0;
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < 3; ++c) img.at(0, c, y, x) = (1.0 - u) * top[c] + u * bottom[c];
        }
    }
    const auto h = static_cast<double>(height);
    const auto w = static_cast<double>(width);
    const int rects = static_cast<int>(rng.uniform_int(2, 4));
    for (int r = 0; r < rects; ++r) {
        const double y0 = rng.uniform(0.0, 0.8 * h);
        const double x0 = rng.uniform(0.0, 0.8 * w);
        const double y1 = y0 + rng.uniform(0.2 * h, 0.5 * h);
        const double x1 = x0 + rng.uniform(0.2 * w, 0.5 * w);
        const auto col = colour();
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                const double cy = y + 0.5;
                const double cx = x + 0.5;
                if (cy >= y0 && cy < y1 && cx >= x0 && cx < x1) {
                    for (std::size_t c = 0; c < 3; ++c) img.at(0, c, y, x) = col[c];
                }
            }
        }
    }
    const int discs = static_cast<int>(rng.uniform_int(1, 2));
    for (int d = 0; d < discs; ++d) {
        const double cy0 = rng.uniform(0.2 * h, 0.8 * h);
        const double cx0 = rng.uniform(0.2 * w, 0.8 * w);
        const double radius = rng.uniform(0.1, 0.25) * std::min(h, w);
        const auto col = colour();
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                const double dy = y + 0.5 - cy0;
                const double dx = x + 0.5 - cx0;
                if (dy * dy + dx * dx <= radius * radius) {
                    for (std::size_t c = 0; c < 3; ++c) img.at(0, c, y, x) = col[c];
                }
            }
        }
    }
    // Mild texture so that histograms are smooth rather than a few spikes.
    std::array<std::array<double, 4>, 3> waves{};
    for (auto& wv : waves) {
        wv = {rng.uniform(0.2, 1.2), rng.uniform(0.2, 1.2), rng.uniform(0.0, 2.0 * std::numbers::pi),
              rng.uniform(0.04, 0.1)};
    }
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double tex = 0.0;
            for (const auto& wv : waves) tex += wv[3] * std::sin(wv[0] * y + wv[1] * x + wv[2]);
            for (std::size_t c = 0; c < 3; ++c) {
                double& v = img.at(0, c, y, x);
                v = std::clamp(v + tex, 0.05, 0.95);
            }
        }
    }
    return img;
}

ImagePair degrade_lowlight(const Tensor& img, double gain, double gamma, double noise_std,
                           std::uint64_t seed) {
    require_rgb(img, "degrade_lowlight");
    if (!(gain > 0.0) || !(gamma > 0.0) || !(noise_std >= 0.0)) {
        throw DomainError("degrade_lowlight: gain and gamma must be positive, noise_std >= 0");
    }
    Rng rng(seed);
    Tensor out = img.clone();
    for (double& v : out.mutable_data()) {
        double d = std::pow(gain * std::clamp(v, 0.0, 1.0), gamma);
        if (noise_std > 0.0) d += noise_std * rng.normal();
        v = std::clamp(d, 0.0, 1.0);
    }
    return {out, clamp01(img), Degradation::LowLight, seed};
}

Tensor haze_model(const Tensor& img, double t, double a) {
    if (!(t >= 0.0 && t <= 1.0) || !(a >= 0.0 && a <= 1.0)) {
        throw DomainError("haze: transmission and airlight must lie in [0, 1]");
    }
    Tensor out = img.clone();
    for (double& v : out.mutable_data()) v = v * t + a * (1.0 - t);
    return out;
}

ImagePair degrade_haze(const Tensor& img, double transmission, double airlight) {
    require_rgb(img, "degrade_haze");
    return {clamp01(haze_model(img, transmission, airlight)), clamp01(img), Degradation::Haze, 0};
}

Tensor rain_layer(std::size_t height, std::size_t width, int streak_count, double angle_deg,
                  double intensity, std::uint64_t seed) {
    if (streak_count < 0 || !(intensity >= 0.0)) {
        throw DomainError("rain: streak_count and intensity must be non-negative");
    }
    Rng rng(seed);
    Tensor layer(Shape{1, 1, height, width});
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double sx = std::sin(theta);
    const double sy = std::cos(theta);
    const auto h = static_cast<double>(height);
    const auto w = static_cast<double>(width);
    for (int s = 0; s < streak_count; ++s) {
        const double y0 = rng.uniform(0.0, h);
        const double x0 = rng.uniform(0.0, w);
        const double length = rng.uniform(0.25 * h, 0.5 * h);
        for (int k = 0; k <= static_cast<int>(length); ++k) {
            const auto py = static_cast<long>(std::floor(y0 + k * sy));
            const auto px = static_cast<long>(std::floor(x0 + k * sx));
            if (py < 0 || px < 0 || py >= static_cast<long>(height) || px >= static_cast<long>(width)) {
                continue;
            }
            layer.at(0, 0, static_cast<std::size_t>(py), static_cast<std::size_t>(px)) = intensity;
        }
    }
    return layer;
}

ImagePair degrade_rain(const Tensor& img, int streak_count, double angle_deg, double intensity,
                       std::uint64_t seed) {
    require_rgb(img, "degrade_rain");
    const Shape s = img.shape();
    Tensor out = img.clone();
    for (std::size_t n = 0; n < s.n; ++n) {
        const Tensor layer = rain_layer(s.h, s.w, streak_count, angle_deg, intensity,
                                        derive_seed(seed, n));
        for (std::size_t c = 0; c < s.c; ++c) {
            for (std::size_t y = 0; y < s.h; ++y) {
                for (std::size_t x = 0; x < s.w; ++x) out.at(n, c, y, x) += layer.at(0, 0, y, x);
            }
        }
    }
    return {clamp01(out), clamp01(img), Degradation::Rain, seed};
}

std::string file_stem(Degradation tag, std::uint64_t seed) {
    return to_string(tag) + "_" + std::to_string(seed);
}

}  // namespace revive::synth
