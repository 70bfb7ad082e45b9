#pragma once

// Direct-formula references used to cross-check the library.

#include <cmath>
#include <cstddef>
#include <vector>

#include "revive/tensor.hpp"

namespace oracle {

// Zero-padded grouped, strided, dilated cross-correlation, written from the
// definition with explicit bounds tests.
inline revive::Tensor conv2d_direct(const revive::Tensor& x, const revive::Tensor& k,
                                    const revive::Tensor& bias, int stride, int dilation, int groups,
                                    int pad) {
    const auto xs = x.shape();
    const auto ks = k.shape();
    const long N = static_cast<long>(xs.n), Cin = static_cast<long>(xs.c);
    const long H = static_cast<long>(xs.h), W = static_cast<long>(xs.w);
    const long Cout = static_cast<long>(ks.n), Cg = static_cast<long>(ks.c);
    const long KH = static_cast<long>(ks.h), KW = static_cast<long>(ks.w);
    const long OH = (H + 2 * pad - dilation * (KH - 1) - 1) / stride + 1;
    const long OW = (W + 2 * pad - dilation * (KW - 1) - 1) / stride + 1;
    const long out_per_group = Cout / groups;
    revive::Tensor out(revive::Shape{xs.n, ks.n, static_cast<std::size_t>(OH), static_cast<std::size_t>(OW)});
    for (long n = 0; n < N; ++n)
        for (long o = 0; o < Cout; ++o) {
            const long grp = o / out_per_group;
            for (long oy = 0; oy < OH; ++oy)
                for (long ox = 0; ox < OW; ++ox) {
                    double s = bias.defined() ? bias.at(0, o, 0, 0) : 0.0;
                    for (long ci = 0; ci < Cg; ++ci)
                        for (long ky = 0; ky < KH; ++ky)
                            for (long kx = 0; kx < KW; ++kx) {
                                const long iy = oy * stride - pad + ky * dilation;
                                const long ix = ox * stride - pad + kx * dilation;
                                if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
                                s += k.at(o, ci, ky, kx) * x.at(n, grp * Cg + ci, iy, ix);
                            }
                    out.at(n, o, oy, ox) = s;
                }
        }
    (void)Cin;
    return out;
}

// Two-pass LayerNorm over (C, H, W) per item with per-channel affine.
inline revive::Tensor layer_norm_two_pass(const revive::Tensor& x, const revive::Tensor& g,
                                          const revive::Tensor& b, double eps) {
    const auto s = x.shape();
    revive::Tensor out(s);
    const double count = static_cast<double>(s.c * s.h * s.w);
    for (std::size_t n = 0; n < s.n; ++n) {
        double mean = 0.0;
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t y = 0; y < s.h; ++y)
                for (std::size_t xx = 0; xx < s.w; ++xx) mean += x.at(n, c, y, xx);
        mean /= count;
        double var = 0.0;
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t y = 0; y < s.h; ++y)
                for (std::size_t xx = 0; xx < s.w; ++xx) {
                    const double d = x.at(n, c, y, xx) - mean;
                    var += d * d;
                }
        var /= count;
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t y = 0; y < s.h; ++y)
                for (std::size_t xx = 0; xx < s.w; ++xx)
                    out.at(n, c, y, xx) = (x.at(n, c, y, xx) - mean) * inv * g.at(0, c, 0, 0) + b.at(0, c, 0, 0);
    }
    return out;
}

// SSIM by the textbook formula: window means first, then centered second
// moments, per valid position on the luminance plane.
inline double ssim_direct(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                          int win = 11, double sigma = 1.5, double peak = 1.0) {
    const int H = static_cast<int>(a.size()), W = static_cast<int>(a[0].size());
    const int r = win / 2;
    std::vector<std::vector<double>> w(win, std::vector<double>(win));
    double total = 0.0;
    for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
            const double di = i - r, dj = j - r;
            w[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            total += w[i][j];
        }
    for (auto& row : w)
        for (double& v : row) v /= total;
    const double C1 = (0.01 * peak) * (0.01 * peak), C2 = (0.03 * peak) * (0.03 * peak);
    double acc = 0.0;
    int count = 0;
    for (int y = 0; y + win <= H; ++y)
        for (int x = 0; x + win <= W; ++x) {
            double ma = 0, mb = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    ma += w[i][j] * a[y + i][x + j];
                    mb += w[i][j] * b[y + i][x + j];
                }
            double va = 0, vb = 0, cab = 0;
            for (int i = 0; i < win; ++i)
                for (int j = 0; j < win; ++j) {
                    const double da = a[y + i][x + j] - ma, db = b[y + i][x + j] - mb;
                    va += w[i][j] * da * da;
                    vb += w[i][j] * db * db;
                    cab += w[i][j] * da * db;
                }
            acc += ((2 * ma * mb + C1) * (2 * cab + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2));
            ++count;
        }
    return acc / count;
}

inline std::vector<std::vector<double>> luminance_grid(const revive::Tensor& rgb, std::size_t n = 0) {
    const auto s = rgb.shape();
    std::vector<std::vector<double>> out(s.h, std::vector<double>(s.w));
    for (std::size_t y = 0; y < s.h; ++y)
        for (std::size_t x = 0; x < s.w; ++x)
            out[y][x] = s.c == 1 ? rgb.at(n, 0, y, x)
                                 : 0.299 * rgb.at(n, 0, y, x) + 0.587 * rgb.at(n, 1, y, x) +
                                       0.114 * rgb.at(n, 2, y, x);
    return out;
}

}  // namespace oracle
