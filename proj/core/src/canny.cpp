#include "revive/canny.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "revive/errors.hpp"

namespace revive::loss {

namespace {

constexpr double kLumR = 0.299;
constexpr double kLumG = 0.587;
constexpr double kLumB = 0.114;
constexpr double kTan22_5 = 0.41421356237309503;  // tan(pi / 8)

std::vector<double> gaussian_taps(double sigma, int radius) {
    std::vector<double> taps(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        total += taps[i + radius];
    }
    for (double& t : taps) t /= total;
    return taps;
}

std::size_t clamp_index(long i, std::size_t n) {
    if (i < 0) return 0;
    if (i >= static_cast<long>(n)) return n - 1;
    return static_cast<std::size_t>(i);
}

}  // namespace

int CannyParams::radius() const { return static_cast<int>(std::ceil(3.0 * sigma)); }

void CannyParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("canny: sigma must be positive");
    if (!(t_low >= 0.0) || !(t_high >= t_low)) {
        throw DomainError("canny: thresholds must satisfy 0 <= t_low <= t_high");
    }
}

Tensor luminance(const Tensor& image) {
    const Shape s = image.shape();
    if (s.c == 1) return image.clone();
    if (s.c != 3) throw ShapeError("luminance: expected 1 or 3 channels, got " + to_string(s));
    Tensor out(Shape{s.n, 1, s.h, s.w});
    auto src = image.data();
    auto dst = out.mutable_data();
    const std::size_t plane = s.plane();
    for (std::size_t n = 0; n < s.n; ++n) {
        const double* r = src.data() + (n * 3) * plane;
        const double* g = r + plane;
        const double* b = g + plane;
        for (std::size_t i = 0; i < plane; ++i) {
            dst[n * plane + i] = kLumR * r[i] + kLumG * g[i] + kLumB * b[i];
        }
    }
    return out;
}

CannyStages canny_plane(const std::vector<double>& plane, std::size_t height, std::size_t width,
                        const CannyParams& params) {
    params.validate();
    const int radius = params.radius();
    const std::size_t k = 2 * static_cast<std::size_t>(radius) + 1;
    if (height < k || width < k) {
        throw ShapeError("canny: image " + std::to_string(height) + "x" + std::to_string(width) +
                         " is smaller than the " + std::to_string(k) + "x" + std::to_string(k) +
                         " Gaussian kernel");
    }
    if (plane.size() != height * width) throw ShapeError("canny: plane size mismatch");

    CannyStages st;
    st.height = height;
    st.width = width;
    const std::size_t n = height * width;
    const auto taps = gaussian_taps(params.sigma, radius);

    std::vector<double> horizontal(n);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += taps[i + radius] * plane[y * width + clamp_index(static_cast<long>(x) + i, width)];
            }
            horizontal[y * width + x] = acc;
        }
    }
    st.blurred.assign(n, 0.0);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                acc += taps[i + radius] *
                       horizontal[clamp_index(static_cast<long>(y) + i, height) * width + x];
            }
            st.blurred[y * width + x] = acc;
        }
    }

    const auto& b = st.blurred;
    auto px = [&](long y, long x) {
        return b[clamp_index(y, height) * width + clamp_index(x, width)];
    };
    const double norm = 4.0 * std::sqrt(2.0);
    st.gx.assign(n, 0.0);
    st.gy.assign(n, 0.0);
    st.magnitude.assign(n, 0.0);
    for (long y = 0; y < static_cast<long>(height); ++y) {
        for (long x = 0; x < static_cast<long>(width); ++x) {
            const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
            const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                              (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
            const std::size_t i = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
            st.gx[i] = gx;
            st.gy[i] = gy;
            st.magnitude[i] = std::sqrt(gx * gx + gy * gy) / norm;
        }
    }

    const auto& m = st.magnitude;
    auto mag = [&](long y, long x) {
        if (y < 0 || x < 0 || y >= static_cast<long>(height) || x >= static_cast<long>(width)) {
            return 0.0;
        }
        return m[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
    };
    st.suppressed.assign(n, 0);
    for (long y = 0; y < static_cast<long>(height); ++y) {
        for (long x = 0; x < static_cast<long>(width); ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
            const double v = m[i];
            if (v == 0.0) continue;
            const double ax = std::abs(st.gx[i]);
            const double ay = std::abs(st.gy[i]);
            long dy = 0;
            long dx = 0;
            if (ay <= ax * kTan22_5) {
                dx = 1;
            } else if (ax <= ay * kTan22_5) {
                dy = 1;
            } else if (st.gx[i] * st.gy[i] > 0.0) {
                dy = 1;
                dx = 1;
            } else {
                dy = 1;
                dx = -1;
            }
            if (v > mag(y - dy, x - dx) && v >= mag(y + dy, x + dx)) st.suppressed[i] = 1;
        }
    }

    st.edges.assign(n, 0);
    std::deque<std::size_t> frontier;
    for (std::size_t i = 0; i < n; ++i) {
        if (st.suppressed[i] && m[i] >= params.t_high) {
            st.edges[i] = 1;
            frontier.push_back(i);
        }
    }
    while (!frontier.empty()) {
        const std::size_t i = frontier.front();
        frontier.pop_front();
        const long y = static_cast<long>(i / width);
        const long x = static_cast<long>(i % width);
        for (long ddy = -1; ddy <= 1; ++ddy) {
            for (long ddx = -1; ddx <= 1; ++ddx) {
                const long ny = y + ddy;
                const long nx = x + ddx;
                if (ny < 0 || nx < 0 || ny >= static_cast<long>(height) ||
                    nx >= static_cast<long>(width)) {
                    continue;
                }
                const std::size_t j =
                    static_cast<std::size_t>(ny) * width + static_cast<std::size_t>(nx);
                if (!st.edges[j] && st.suppressed[j] && m[j] >= params.t_low) {
                    st.edges[j] = 1;
                    frontier.push_back(j);
                }
            }
        }
    }
    return st;
}

Tensor canny(const Tensor& image, const CannyParams& params) {
    const Tensor lum = luminance(image);
    const Shape s = lum.shape();
    Tensor out(Shape{s.n, 1, s.h, s.w});
    auto dst = out.mutable_data();
    auto src = lum.data();
    const std::size_t plane = s.plane();
    for (std::size_t n = 0; n < s.n; ++n) {
        std::vector<double> centered(plane);
        for (std::size_t i = 0; i < plane; ++i) centered[i] = src[n * plane + i] - 0.5;
        const CannyStages st = canny_plane(centered, s.h, s.w, params);
        for (std::size_t i = 0; i < plane; ++i) dst[n * plane + i] = st.edges[i];
    }
    return out;
}

}  // namespace revive::loss
