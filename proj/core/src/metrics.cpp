#include "revive/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "revive/canny.hpp"
#include "revive/errors.hpp"

namespace revive::metrics {

double psnr(const Tensor& a, const Tensor& b, double peak) {
    if (a.shape() != b.shape()) throw ShapeError("psnr: shape mismatch");
    if (!(peak > 0.0)) throw DomainError("psnr: peak must be positive");
    auto x = a.data();
    auto y = b.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(x.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

void SsimOptions::validate() const {
    if (window < 1 || window % 2 == 0) throw DomainError("ssim: window must be odd and positive");
    if (!(sigma > 0.0) || !(peak > 0.0)) throw DomainError("ssim: sigma and peak must be positive");
}

Tensor ssim_map(const Tensor& a, const Tensor& b, std::size_t item, const SsimOptions& opt) {
    if (a.shape() != b.shape()) throw ShapeError("ssim: shape mismatch");
    opt.validate();
    const Tensor la = loss::luminance(a);
    const Tensor lb = loss::luminance(b);
    const Shape s = la.shape();
    const auto win = static_cast<std::size_t>(opt.window);
    if (s.h < win || s.w < win) {
        throw ShapeError("ssim: image smaller than the " + std::to_string(win) + "x" +
                         std::to_string(win) + " window");
    }
    if (item >= s.n) throw ShapeError("ssim: item out of range");

    const int r = opt.window / 2;
    std::vector<double> g(win);
    double total = 0.0;
    for (int i = -r; i <= r; ++i) {
        g[i + r] = std::exp(-(i * i) / (2.0 * opt.sigma * opt.sigma));
        total += g[i + r];
    }
    std::vector<double> w2(win * win);
    for (std::size_t i = 0; i < win; ++i) {
        for (std::size_t j = 0; j < win; ++j) w2[i * win + j] = g[i] * g[j] / (total * total);
    }

    const double c1 = (opt.k1 * opt.peak) * (opt.k1 * opt.peak);
    const double c2 = (opt.k2 * opt.peak) * (opt.k2 * opt.peak);
    const std::size_t oh = s.h - win + 1;
    const std::size_t ow = s.w - win + 1;
    Tensor out(Shape{1, 1, oh, ow});
    const double* pa = la.data().data() + item * s.plane();
    const double* pb = lb.data().data() + item * s.plane();
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
            for (std::size_t i = 0; i < win; ++i) {
                for (std::size_t j = 0; j < win; ++j) {
                    const double wt = w2[i * win + j];
                    const double va = pa[(y + i) * s.w + x + j];
                    const double vb = pb[(y + i) * s.w + x + j];
                    ma += wt * va;
                    mb += wt * vb;
                    saa += wt * (va * va);
                    sbb += wt * (vb * vb);
                    sab += wt * (va * vb);
                }
            }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            const double num = (2.0 * (ma * mb) + c1) * (2.0 * cov + c2);
            const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
            out.at(0, 0, y, x) = num / den;
        }
    }
    return out;
}

double ssim(const Tensor& a, const Tensor& b, const SsimOptions& options) {
    const std::size_t n = a.shape().n;
    double total = 0.0;
    for (std::size_t item = 0; item < n; ++item) {
        const Tensor m = ssim_map(a, b, item, options);
        double acc = 0.0;
        for (double v : m.data()) acc += v;
        total += acc / static_cast<double>(m.numel());
    }
    return total / static_cast<double>(n);
}

MetricReport evaluate(const Tensor& restored, const Tensor& reference) {
    return {psnr(restored, reference), ssim(restored, reference)};
}

}  // namespace revive::metrics
