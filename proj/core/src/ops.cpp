#include "revive/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "revive/autodiff.hpp"
#include "revive/errors.hpp"

namespace revive {

namespace {

using Impl = detail::TensorImpl;
using ImplPtr = std::shared_ptr<Impl>;
using Grad = std::vector<double>;

void require_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw ShapeError(std::string(op) + ": undefined input tensor");
}

bool should_record(std::initializer_list<const Tensor*> inputs) {
    if (Tape::active() == nullptr) return false;
    for (const Tensor* t : inputs) {
        if (t != nullptr && t->defined() && t->requires_grad()) return true;
    }
    return false;
}

Tensor make_output(const char* op, Shape shape, std::vector<double> data) {
    for (double v : data) {
        if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite result");
    }
    return Tensor(shape, std::move(data));
}

void record(const char* op, const Tensor& out, std::function<void(const Grad&)> fn) {
    out.impl()->requires_grad = true;
    out.impl()->is_leaf = false;
    Tape::active()->record(TapeNode{op, out.impl(), std::move(fn)});
}

// Gradient buffer of `t` if it participates in differentiation, else nullptr.
double* grad_buffer(const ImplPtr& t) {
    if (!t || !t->requires_grad) return nullptr;
    if (t->grad.empty()) t->grad.assign(t->data.size(), 0.0);
    return t->grad.data();
}

// ---------------------------------------------------------------- convolution

struct ConvGeometry {
    std::size_t n, in_c, h, w;
    std::size_t out_c, kh, kw;
    std::size_t groups, in_per_group, out_per_group;
    long stride, dilation, pad_top, pad_left;
    std::size_t out_h, out_w;
};

long same_padding_total(long in, long k, long stride, long dilation) {
    const long out = (in + stride - 1) / stride;
    return std::max(0L, (out - 1) * stride + dilation * (k - 1) + 1 - in);
}

ConvGeometry conv_geometry(const Shape& in, const Shape& k, const Conv2dOptions& opt,
                           const char* op) {
    if (opt.stride < 1 || opt.dilation < 1 || opt.groups < 1) {
        throw ShapeError(std::string(op) + ": stride, dilation and groups must be positive");
    }
    const auto groups = static_cast<std::size_t>(opt.groups);
    if (in.c % groups != 0) {
        throw ShapeError(std::string(op) + ": " + std::to_string(in.c) +
                         " input channels not divisible by groups=" + std::to_string(groups));
    }
    if (k.n % groups != 0) {
        throw ShapeError(std::string(op) + ": " + std::to_string(k.n) +
                         " output channels not divisible by groups=" + std::to_string(groups));
    }
    if (k.c != in.c / groups) {
        throw ShapeError(std::string(op) + ": kernel " + to_string(k) + " expects " +
                         std::to_string(k.c) + " channels per group, input has " +
                         std::to_string(in.c / groups));
    }
    if (k.h == 0 || k.w == 0) throw ShapeError(std::string(op) + ": empty kernel");

    ConvGeometry g{};
    g.n = in.n;
    g.in_c = in.c;
    g.h = in.h;
    g.w = in.w;
    g.out_c = k.n;
    g.kh = k.h;
    g.kw = k.w;
    g.groups = groups;
    g.in_per_group = in.c / groups;
    g.out_per_group = k.n / groups;
    g.stride = opt.stride;
    g.dilation = opt.dilation;

    long pad_h_total = 0;
    long pad_w_total = 0;
    if (opt.padding) {
        if (*opt.padding < 0) throw ShapeError(std::string(op) + ": negative padding");
        pad_h_total = 2L * *opt.padding;
        pad_w_total = 2L * *opt.padding;
    } else {
        pad_h_total = same_padding_total(static_cast<long>(in.h), static_cast<long>(k.h),
                                         g.stride, g.dilation);
        pad_w_total = same_padding_total(static_cast<long>(in.w), static_cast<long>(k.w),
                                         g.stride, g.dilation);
    }
    g.pad_top = pad_h_total / 2;
    g.pad_left = pad_w_total / 2;

    const long span_h = g.dilation * (static_cast<long>(k.h) - 1) + 1;
    const long span_w = g.dilation * (static_cast<long>(k.w) - 1) + 1;
    const long oh = (static_cast<long>(in.h) + pad_h_total - span_h) / g.stride + 1;
    const long ow = (static_cast<long>(in.w) + pad_w_total - span_w) / g.stride + 1;
    if (oh <= 0 || ow <= 0) {
        throw ShapeError(std::string(op) + ": kernel footprint exceeds padded input " +
                         to_string(in));
    }
    g.out_h = static_cast<std::size_t>(oh);
    g.out_w = static_cast<std::size_t>(ow);
    return g;
}

// Output indices o in [lo, hi) for which o*stride + offset lands inside [0, extent).
void valid_range(long offset, long stride, long extent, long out_extent, long& lo, long& hi) {
    // o >= ceil(-offset / stride)
    lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
    // o <= floor((extent - 1 - offset) / stride)
    const long top = extent - 1 - offset;
    hi = top < 0 ? 0 : top / stride + 1;
    lo = std::min(lo, out_extent);
    hi = std::clamp(hi, lo, out_extent);
}

// Shared by conv2d and depthwise_conv2d so both paths accumulate in the same order.
std::vector<double> conv_forward(const ConvGeometry& g, std::span<const double> x,
                                 std::span<const double> k, const double* bias) {
    std::vector<double> out(g.n * g.out_c * g.out_h * g.out_w, 0.0);
    const long H = static_cast<long>(g.h);
    const long W = static_cast<long>(g.w);
    const long OH = static_cast<long>(g.out_h);
    const long OW = static_cast<long>(g.out_w);
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t oc = 0; oc < g.out_c; ++oc) {
            const std::size_t group = oc / g.out_per_group;
            double* o = out.data() + (n * g.out_c + oc) * g.out_h * g.out_w;
            for (std::size_t icg = 0; icg < g.in_per_group; ++icg) {
                const std::size_t ic = group * g.in_per_group + icg;
                const double* xi = x.data() + (n * g.in_c + ic) * g.h * g.w;
                const double* kk = k.data() + (oc * g.in_per_group + icg) * g.kh * g.kw;
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long off_y = static_cast<long>(ky) * g.dilation - g.pad_top;
                    long oy0, oy1;
                    valid_range(off_y, g.stride, H, OH, oy0, oy1);
                    for (std::size_t kx = 0; kx < g.kw; ++kx) {
                        const double kv = kk[ky * g.kw + kx];
                        const long off_x = static_cast<long>(kx) * g.dilation - g.pad_left;
                        long ox0, ox1;
                        valid_range(off_x, g.stride, W, OW, ox0, ox1);
                        for (long oy = oy0; oy < oy1; ++oy) {
                            const double* row = xi + (oy * g.stride + off_y) * W;
                            double* orow = o + oy * OW;
                            for (long ox = ox0; ox < ox1; ++ox) {
                                orow[ox] += kv * row[ox * g.stride + off_x];
                            }
                        }
                    }
                }
            }
            if (bias != nullptr) {
                const double b = bias[oc];
                for (std::size_t i = 0; i < g.out_h * g.out_w; ++i) o[i] += b;
            }
        }
    }
    return out;
}

void conv_backward(const ConvGeometry& g, const Grad& go, std::span<const double> x,
                   std::span<const double> k, double* gx, double* gk, double* gb) {
    const long H = static_cast<long>(g.h);
    const long W = static_cast<long>(g.w);
    const long OH = static_cast<long>(g.out_h);
    const long OW = static_cast<long>(g.out_w);
    for (std::size_t n = 0; n < g.n; ++n) {
        for (std::size_t oc = 0; oc < g.out_c; ++oc) {
            const std::size_t group = oc / g.out_per_group;
            const double* o = go.data() + (n * g.out_c + oc) * g.out_h * g.out_w;
            if (gb != nullptr) {
                double s = 0.0;
                for (std::size_t i = 0; i < g.out_h * g.out_w; ++i) s += o[i];
                gb[oc] += s;
            }
            for (std::size_t icg = 0; icg < g.in_per_group; ++icg) {
                const std::size_t ic = group * g.in_per_group + icg;
                const std::size_t in_base = (n * g.in_c + ic) * g.h * g.w;
                const std::size_t k_base = (oc * g.in_per_group + icg) * g.kh * g.kw;
                for (std::size_t ky = 0; ky < g.kh; ++ky) {
                    const long off_y = static_cast<long>(ky) * g.dilation - g.pad_top;
                    long oy0, oy1;
                    valid_range(off_y, g.stride, H, OH, oy0, oy1);
                    for (std::size_t kx = 0; kx < g.kw; ++kx) {
                        const long off_x = static_cast<long>(kx) * g.dilation - g.pad_left;
                        long ox0, ox1;
                        valid_range(off_x, g.stride, W, OW, ox0, ox1);
                        const double kv = k[k_base + ky * g.kw + kx];
                        double kgrad = 0.0;
                        for (long oy = oy0; oy < oy1; ++oy) {
                            const std::size_t in_row =
                                in_base + static_cast<std::size_t>((oy * g.stride + off_y) * W);
                            const double* orow = o + oy * OW;
                            for (long ox = ox0; ox < ox1; ++ox) {
                                const std::size_t idx =
                                    in_row + static_cast<std::size_t>(ox * g.stride + off_x);
                                if (gx != nullptr) gx[idx] += kv * orow[ox];
                                kgrad += x[idx] * orow[ox];
                            }
                        }
                        if (gk != nullptr) gk[k_base + ky * g.kw + kx] += kgrad;
                    }
                }
            }
        }
    }
}

void check_bias(const Tensor& bias, std::size_t out_c, const char* op) {
    if (!bias.defined()) return;
    if (bias.shape() != Shape{1, out_c, 1, 1}) {
        throw ShapeError(std::string(op) + ": bias shape " + to_string(bias.shape()) +
                         ", expected (1, " + std::to_string(out_c) + ", 1, 1)");
    }
}

Tensor conv_impl(const char* op, const Tensor& input, const Tensor& kernel, const Tensor& bias,
                 const ConvGeometry& g) {
    check_bias(bias, g.out_c, op);
    const double* b = bias.defined() ? bias.data().data() : nullptr;
    Tensor out = make_output(op, Shape{g.n, g.out_c, g.out_h, g.out_w},
                             conv_forward(g, input.data(), kernel.data(), b));
    if (should_record({&input, &kernel, &bias})) {
        record(op, out,
               [g, xi = input.impl(), ki = kernel.impl(),
                bi = bias.defined() ? bias.impl() : ImplPtr{}](const Grad& go) {
                   conv_backward(g, go, xi->data, ki->data, grad_buffer(xi), grad_buffer(ki),
                                 grad_buffer(bi));
               });
    }
    return out;
}

// ---------------------------------------------------------------- broadcasting

struct Strides {
    std::size_t n, c, h, w;
};

bool broadcast_pattern_ok(const Shape& s, const Shape& out) {
    if (s.n != out.n && s.n != 1) return false;
    const bool full = s.c == out.c && s.h == out.h && s.w == out.w;
    const bool channel = s.c == out.c && s.h == 1 && s.w == 1;
    const bool spatial = s.c == 1 && s.h == out.h && s.w == out.w;
    return full || channel || spatial;
}

Strides broadcast_strides(const Shape& s) {
    return Strides{s.n == 1 ? 0 : s.c * s.h * s.w, s.c == 1 ? 0 : s.h * s.w, s.h == 1 ? 0 : s.w,
                   s.w == 1 ? 0U : 1U};
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
    const Shape out{std::max(a.n, b.n), std::max(a.c, b.c), std::max(a.h, b.h),
                    std::max(a.w, b.w)};
    if (!broadcast_pattern_ok(a, out) || !broadcast_pattern_ok(b, out)) {
        throw ShapeError(std::string(op) + ": cannot broadcast " + to_string(a) + " with " +
                         to_string(b));
    }
    return out;
}

template <typename Fn>
void for_each_broadcast(const Shape& out, const Shape& a, const Shape& b, Fn&& fn) {
    const Strides sa = broadcast_strides(a);
    const Strides sb = broadcast_strides(b);
    std::size_t i = 0;
    for (std::size_t n = 0; n < out.n; ++n)
        for (std::size_t c = 0; c < out.c; ++c)
            for (std::size_t h = 0; h < out.h; ++h)
                for (std::size_t w = 0; w < out.w; ++w, ++i) {
                    fn(i, n * sa.n + c * sa.c + h * sa.h + w * sa.w,
                       n * sb.n + c * sb.c + h * sb.h + w * sb.w);
                }
}

enum class BinaryKind { Add, Sub, Mul };

Tensor binary(const char* op, const Tensor& a, const Tensor& b, BinaryKind kind) {
    require_defined(a, op);
    require_defined(b, op);
    const Shape out_shape = broadcast_shape(a.shape(), b.shape(), op);
    std::vector<double> out(out_shape.numel());
    auto x = a.data();
    auto y = b.data();
    for_each_broadcast(out_shape, a.shape(), b.shape(),
                       [&](std::size_t i, std::size_t ia, std::size_t ib) {
                           switch (kind) {
                               case BinaryKind::Add: out[i] = x[ia] + y[ib]; break;
                               case BinaryKind::Sub: out[i] = x[ia] - y[ib]; break;
                               case BinaryKind::Mul: out[i] = x[ia] * y[ib]; break;
                           }
                       });
    Tensor result = make_output(op, out_shape, std::move(out));
    if (should_record({&a, &b})) {
        record(op, result, [out_shape, kind, ai = a.impl(), bi = b.impl()](const Grad& go) {
            double* ga = grad_buffer(ai);
            double* gb = grad_buffer(bi);
            for_each_broadcast(out_shape, ai->shape, bi->shape,
                               [&](std::size_t i, std::size_t ia, std::size_t ib) {
                                   switch (kind) {
                                       case BinaryKind::Add:
                                           if (ga) ga[ia] += go[i];
                                           if (gb) gb[ib] += go[i];
                                           break;
                                       case BinaryKind::Sub:
                                           if (ga) ga[ia] += go[i];
                                           if (gb) gb[ib] -= go[i];
                                           break;
                                       case BinaryKind::Mul:
                                           if (ga) ga[ia] += go[i] * bi->data[ib];
                                           if (gb) gb[ib] += go[i] * ai->data[ia];
                                           break;
                                   }
                               });
        });
    }
    return result;
}

// y = f(x) elementwise; dfdx receives (x, y).
template <typename F, typename D>
Tensor unary(const char* op, const Tensor& x, F f, D dfdx) {
    require_defined(x, op);
    auto in = x.data();
    std::vector<double> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
    Tensor result = make_output(op, x.shape(), std::move(out));
    if (should_record({&x})) {
        record(op, result,
               [dfdx, xi = x.impl(), yi = std::weak_ptr<Impl>(result.impl())](const Grad& go) {
                   double* gx = grad_buffer(xi);
                   if (gx == nullptr) return;
                   auto y = yi.lock();
                   for (std::size_t i = 0; i < go.size(); ++i) {
                       gx[i] += go[i] * dfdx(xi->data[i], y->data[i]);
                   }
               });
    }
    return result;
}

double stable_sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------- public ops

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const Conv2dOptions& options) {
    require_defined(input, "conv2d");
    require_defined(kernel, "conv2d");
    const ConvGeometry g = conv_geometry(input.shape(), kernel.shape(), options, "conv2d");
    return conv_impl("conv2d", input, kernel, bias, g);
}

Tensor depthwise_conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                        int dilation) {
    require_defined(input, "depthwise_conv2d");
    require_defined(kernel, "depthwise_conv2d");
    const Shape& in = input.shape();
    const Shape& k = kernel.shape();
    if (k.c != 1 || k.h != 3 || k.w != 3 || in.c == 0 || k.n % in.c != 0) {
        throw ShapeError("depthwise_conv2d: kernel " + to_string(k) + " for input " +
                         to_string(in) + "; expected (m*C, 1, 3, 3)");
    }
    Conv2dOptions opt;
    opt.dilation = dilation;
    opt.groups = static_cast<int>(in.c);
    const ConvGeometry g = conv_geometry(in, k, opt, "depthwise_conv2d");
    return conv_impl("depthwise_conv2d", input, kernel, bias, g);
}

Tensor layer_norm(const Tensor& input, const Tensor& scale, const Tensor& shift, double eps) {
    require_defined(input, "layer_norm");
    if (!(eps > 0.0)) throw DomainError("layer_norm: eps must be positive");
    const Shape s = input.shape();
    if (s.numel() == 0) throw ShapeError("layer_norm: zero-size tensor");
    const Shape affine{1, s.c, 1, 1};
    if (scale.defined() && scale.shape() != affine) {
        throw ShapeError("layer_norm: scale shape " + to_string(scale.shape()));
    }
    if (shift.defined() && shift.shape() != affine) {
        throw ShapeError("layer_norm: shift shape " + to_string(shift.shape()));
    }

    const std::size_t per_item = s.c * s.h * s.w;
    const std::size_t plane = s.h * s.w;
    auto x = input.data();
    std::vector<double> xhat(x.size());
    std::vector<double> inv_std(s.n);
    for (std::size_t n = 0; n < s.n; ++n) {
        const double* xi = x.data() + n * per_item;
        // Shifted accumulation: exact zero mean deviation for constant input.
        const double ref = xi[0];
        double acc = 0.0;
        for (std::size_t i = 0; i < per_item; ++i) acc += xi[i] - ref;
        const double mean = ref + acc / static_cast<double>(per_item);
        double var = 0.0;
        for (std::size_t i = 0; i < per_item; ++i) {
            const double d = xi[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(per_item);
        inv_std[n] = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < per_item; ++i) {
            xhat[n * per_item + i] = (xi[i] - mean) * inv_std[n];
        }
    }

    std::vector<double> out(xhat);
    if (scale.defined() || shift.defined()) {
        auto sc = scale.defined() ? scale.data() : std::span<const double>{};
        auto sh = shift.defined() ? shift.data() : std::span<const double>{};
        for (std::size_t n = 0; n < s.n; ++n)
            for (std::size_t c = 0; c < s.c; ++c) {
                const double a = sc.empty() ? 1.0 : sc[c];
                const double b = sh.empty() ? 0.0 : sh[c];
                double* o = out.data() + n * per_item + c * plane;
                for (std::size_t i = 0; i < plane; ++i) o[i] = o[i] * a + b;
            }
    }
    Tensor result = make_output("layer_norm", s, std::move(out));
    if (should_record({&input, &scale, &shift})) {
        record("layer_norm", result,
               [s, xhat = std::move(xhat), inv_std = std::move(inv_std), xi = input.impl(),
                si = scale.defined() ? scale.impl() : ImplPtr{},
                bi = shift.defined() ? shift.impl() : ImplPtr{}](const Grad& go) {
                   const std::size_t per_item = s.c * s.h * s.w;
                   const std::size_t plane = s.h * s.w;
                   double* gx = grad_buffer(xi);
                   double* gs = grad_buffer(si);
                   double* gb = grad_buffer(bi);
                   std::vector<double> gxhat(per_item);
                   for (std::size_t n = 0; n < s.n; ++n) {
                       const std::size_t base = n * per_item;
                       double mean_g = 0.0;
                       double mean_gx = 0.0;
                       for (std::size_t c = 0; c < s.c; ++c) {
                           const double a = si ? si->data[c] : 1.0;
                           for (std::size_t p = 0; p < plane; ++p) {
                               const std::size_t i = c * plane + p;
                               const double g = go[base + i];
                               if (gs) gs[c] += g * xhat[base + i];
                               if (gb) gb[c] += g;
                               gxhat[i] = g * a;
                               mean_g += gxhat[i];
                               mean_gx += gxhat[i] * xhat[base + i];
                           }
                       }
                       if (gx == nullptr) continue;
                       mean_g /= static_cast<double>(per_item);
                       mean_gx /= static_cast<double>(per_item);
                       for (std::size_t i = 0; i < per_item; ++i) {
                           gx[base + i] +=
                               inv_std[n] * (gxhat[i] - mean_g - xhat[base + i] * mean_gx);
                       }
                   }
               });
    }
    return result;
}

Tensor simple_gate(const Tensor& input) {
    require_defined(input, "simple_gate");
    const Shape s = input.shape();
    if (s.c % 2 != 0) {
        throw ShapeError("simple_gate: odd channel count " + std::to_string(s.c));
    }
    const std::size_t half = s.c / 2;
    const std::size_t plane = s.h * s.w;
    const Shape out_shape{s.n, half, s.h, s.w};
    auto x = input.data();
    std::vector<double> out(out_shape.numel());
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < half; ++c) {
            const double* a = x.data() + (n * s.c + c) * plane;
            const double* b = x.data() + (n * s.c + c + half) * plane;
            double* o = out.data() + (n * half + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) o[i] = a[i] * b[i];
        }
    Tensor result = make_output("simple_gate", out_shape, std::move(out));
    if (should_record({&input})) {
        record("simple_gate", result, [s, xi = input.impl()](const Grad& go) {
            double* gx = grad_buffer(xi);
            if (gx == nullptr) return;
            const std::size_t half = s.c / 2;
            const std::size_t plane = s.h * s.w;
            for (std::size_t n = 0; n < s.n; ++n)
                for (std::size_t c = 0; c < half; ++c) {
                    const std::size_t ia = (n * s.c + c) * plane;
                    const std::size_t ib = (n * s.c + c + half) * plane;
                    const std::size_t io = (n * half + c) * plane;
                    for (std::size_t i = 0; i < plane; ++i) {
                        gx[ia + i] += go[io + i] * xi->data[ib + i];
                        gx[ib + i] += go[io + i] * xi->data[ia + i];
                    }
                }
        });
    }
    return result;
}

Tensor sca(const Tensor& input, const Tensor& weight, const Tensor& bias) {
    require_defined(input, "sca");
    require_defined(weight, "sca");
    const std::size_t c = input.shape().c;
    if (weight.shape() != Shape{c, c, 1, 1}) {
        throw ShapeError("sca: weight " + to_string(weight.shape()) + " for " +
                         std::to_string(c) + " channels");
    }
    const Tensor pooled = pool_reduce(input, PoolKind::AvgOverSpace);
    const Tensor attention = conv2d(pooled, weight, bias, Conv2dOptions{.padding = 0});
    return mul(input, attention);
}

Tensor pool_reduce(const Tensor& input, PoolKind kind) {
    require_defined(input, "pool_reduce");
    const Shape s = input.shape();
    if (s.numel() == 0) throw ShapeError("pool_reduce: zero-size tensor");
    const std::size_t plane = s.h * s.w;
    auto x = input.data();

    if (kind == PoolKind::AvgOverSpace) {
        const Shape out_shape{s.n, s.c, 1, 1};
        std::vector<double> out(out_shape.numel());
        for (std::size_t i = 0; i < s.n * s.c; ++i) {
            double acc = 0.0;
            for (std::size_t p = 0; p < plane; ++p) acc += x[i * plane + p];
            out[i] = acc / static_cast<double>(plane);
        }
        Tensor result = make_output("pool_reduce", out_shape, std::move(out));
        if (should_record({&input})) {
            record("pool_reduce", result, [s, xi = input.impl()](const Grad& go) {
                double* gx = grad_buffer(xi);
                if (gx == nullptr) return;
                const std::size_t plane = s.h * s.w;
                const double inv = 1.0 / static_cast<double>(plane);
                for (std::size_t i = 0; i < s.n * s.c; ++i)
                    for (std::size_t p = 0; p < plane; ++p) gx[i * plane + p] += go[i] * inv;
            });
        }
        return result;
    }

    const Shape out_shape{s.n, 1, s.h, s.w};
    std::vector<double> out(out_shape.numel());
    std::vector<std::size_t> argmax;
    const bool is_max = kind == PoolKind::MaxOverChannels;
    if (is_max) argmax.resize(out.size());
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t p = 0; p < plane; ++p) {
            const std::size_t first = n * s.c * plane + p;
            if (is_max) {
                std::size_t best = first;
                for (std::size_t c = 1; c < s.c; ++c) {
                    const std::size_t idx = first + c * plane;
                    if (x[idx] > x[best]) best = idx;
                }
                out[n * plane + p] = x[best];
                argmax[n * plane + p] = best;
            } else {
                double acc = 0.0;
                for (std::size_t c = 0; c < s.c; ++c) acc += x[first + c * plane];
                out[n * plane + p] = acc / static_cast<double>(s.c);
            }
        }
    Tensor result = make_output("pool_reduce", out_shape, std::move(out));
    if (should_record({&input})) {
        record("pool_reduce", result,
               [s, is_max, argmax = std::move(argmax), xi = input.impl()](const Grad& go) {
                   double* gx = grad_buffer(xi);
                   if (gx == nullptr) return;
                   const std::size_t plane = s.h * s.w;
                   const double inv = 1.0 / static_cast<double>(s.c);
                   for (std::size_t n = 0; n < s.n; ++n)
                       for (std::size_t p = 0; p < plane; ++p) {
                           const double g = go[n * plane + p];
                           if (is_max) {
                               gx[argmax[n * plane + p]] += g;
                           } else {
                               const std::size_t first = n * s.c * plane + p;
                               for (std::size_t c = 0; c < s.c; ++c) gx[first + c * plane] += g * inv;
                           }
                       }
               });
    }
    return result;
}

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", a, b, BinaryKind::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary("sub", a, b, BinaryKind::Sub); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary("mul", a, b, BinaryKind::Mul); }

Tensor sigmoid(const Tensor& x) {
    return unary(
        "sigmoid", x, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
    return unary(
        "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor abs(const Tensor& x) {
    return unary(
        "abs", x, [](double v) { return std::abs(v); },
        [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
    return unary(
        "square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor softplus(const Tensor& x) {
    return unary(
        "softplus", x,
        [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
        [](double v, double) { return stable_sigmoid(v); });
}

Tensor sqrt_eps(const Tensor& x, double eps) {
    if (!(eps >= 0.0)) throw DomainError("sqrt_eps: eps must be non-negative");
    for (double v : x.data()) {
        if (v + eps < 0.0) throw NumericError("sqrt_eps: negative argument");
    }
    return unary(
        "sqrt_eps", x, [eps](double v) { return std::sqrt(v + eps); },
        [](double, double y) { return 0.5 / y; });
}

Tensor scale(const Tensor& x, double factor) {
    return unary(
        "scale", x, [factor](double v) { return v * factor; },
        [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
    return unary(
        "add_scalar", x, [value](double v) { return v + value; },
        [](double, double) { return 1.0; });
}

Tensor one_minus(const Tensor& x) {
    return unary(
        "one_minus", x, [](double v) { return 1.0 - v; }, [](double, double) { return -1.0; });
}

Tensor interp2x_up(const Tensor& x) {
    require_defined(x, "interp2x_up");
    const Shape s = x.shape();
    if (s.h == 0 || s.w == 0) throw ShapeError("interp2x_up: empty spatial extent");
    const Shape out_shape{s.n, s.c, 2 * s.h, 2 * s.w};
    // Output index 2i samples source i - 0.25, index 2i+1 samples i + 0.25.
    auto taps = [](std::size_t o, std::size_t extent, std::size_t& near, std::size_t& far) {
        near = o / 2;
        if (o % 2 == 0) {
            far = near == 0 ? 0 : near - 1;
        } else {
            far = near + 1 < extent ? near + 1 : near;
        }
    };
    auto in = x.data();
    std::vector<double> out(out_shape.numel());
    const std::size_t OH = out_shape.h;
    const std::size_t OW = out_shape.w;
    for (std::size_t p = 0; p < s.n * s.c; ++p) {
        const double* src = in.data() + p * s.h * s.w;
        double* dst = out.data() + p * OH * OW;
        for (std::size_t oy = 0; oy < OH; ++oy) {
            std::size_t y0, y1;
            taps(oy, s.h, y0, y1);
            for (std::size_t ox = 0; ox < OW; ++ox) {
                std::size_t x0, x1;
                taps(ox, s.w, x0, x1);
                dst[oy * OW + ox] = 0.5625 * src[y0 * s.w + x0] + 0.1875 * src[y0 * s.w + x1] +
                                    0.1875 * src[y1 * s.w + x0] + 0.0625 * src[y1 * s.w + x1];
            }
        }
    }
    Tensor result = make_output("interp2x_up", out_shape, std::move(out));
    if (should_record({&x})) {
        record("interp2x_up", result, [s, taps, xi = x.impl()](const Grad& go) {
            double* gx = grad_buffer(xi);
            if (gx == nullptr) return;
            const std::size_t OH = 2 * s.h;
            const std::size_t OW = 2 * s.w;
            for (std::size_t p = 0; p < s.n * s.c; ++p) {
                double* g = gx + p * s.h * s.w;
                const double* o = go.data() + p * OH * OW;
                for (std::size_t oy = 0; oy < OH; ++oy) {
                    std::size_t y0, y1;
                    taps(oy, s.h, y0, y1);
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        std::size_t x0, x1;
                        taps(ox, s.w, x0, x1);
                        const double v = o[oy * OW + ox];
                        g[y0 * s.w + x0] += 0.5625 * v;
                        g[y0 * s.w + x1] += 0.1875 * v;
                        g[y1 * s.w + x0] += 0.1875 * v;
                        g[y1 * s.w + x1] += 0.0625 * v;
                    }
                }
            }
        });
    }
    return result;
}

Tensor interp2x_down(const Tensor& x) {
    require_defined(x, "interp2x_down");
    const Shape s = x.shape();
    if (s.h % 2 != 0 || s.w % 2 != 0 || s.h == 0 || s.w == 0) {
        throw ShapeError("interp2x_down: spatial dims must be even, got " + to_string(s));
    }
    const Shape out_shape{s.n, s.c, s.h / 2, s.w / 2};
    auto in = x.data();
    std::vector<double> out(out_shape.numel());
    for (std::size_t p = 0; p < s.n * s.c; ++p) {
        const double* src = in.data() + p * s.h * s.w;
        double* dst = out.data() + p * out_shape.h * out_shape.w;
        for (std::size_t oy = 0; oy < out_shape.h; ++oy)
            for (std::size_t ox = 0; ox < out_shape.w; ++ox) {
                const double* r0 = src + 2 * oy * s.w + 2 * ox;
                const double* r1 = r0 + s.w;
                dst[oy * out_shape.w + ox] = 0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
            }
    }
    Tensor result = make_output("interp2x_down", out_shape, std::move(out));
    if (should_record({&x})) {
        record("interp2x_down", result, [s, xi = x.impl()](const Grad& go) {
            double* gx = grad_buffer(xi);
            if (gx == nullptr) return;
            const std::size_t oh = s.h / 2;
            const std::size_t ow = s.w / 2;
            for (std::size_t p = 0; p < s.n * s.c; ++p) {
                double* g = gx + p * s.h * s.w;
                const double* o = go.data() + p * oh * ow;
                for (std::size_t oy = 0; oy < oh; ++oy)
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const double v = 0.25 * o[oy * ow + ox];
                        double* r0 = g + 2 * oy * s.w + 2 * ox;
                        double* r1 = r0 + s.w;
                        r0[0] += v;
                        r0[1] += v;
                        r1[0] += v;
                        r1[1] += v;
                    }
            }
        });
    }
    return result;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_defined(a, "concat_channels");
    require_defined(b, "concat_channels");
    const Shape sa = a.shape();
    const Shape sb = b.shape();
    if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
        throw ShapeError("concat_channels: " + to_string(sa) + " vs " + to_string(sb));
    }
    const Shape out_shape{sa.n, sa.c + sb.c, sa.h, sa.w};
    const std::size_t plane = sa.h * sa.w;
    std::vector<double> out;
    out.reserve(out_shape.numel());
    auto x = a.data();
    auto y = b.data();
    for (std::size_t n = 0; n < sa.n; ++n) {
        out.insert(out.end(), x.begin() + n * sa.c * plane, x.begin() + (n + 1) * sa.c * plane);
        out.insert(out.end(), y.begin() + n * sb.c * plane, y.begin() + (n + 1) * sb.c * plane);
    }
    Tensor result = make_output("concat_channels", out_shape, std::move(out));
    if (should_record({&a, &b})) {
        record("concat_channels", result, [sa, sb, ai = a.impl(), bi = b.impl()](const Grad& go) {
            double* ga = grad_buffer(ai);
            double* gb = grad_buffer(bi);
            const std::size_t plane = sa.h * sa.w;
            const std::size_t ca = sa.c * plane;
            const std::size_t cb = sb.c * plane;
            for (std::size_t n = 0; n < sa.n; ++n) {
                const double* src = go.data() + n * (ca + cb);
                if (ga)
                    for (std::size_t i = 0; i < ca; ++i) ga[n * ca + i] += src[i];
                if (gb)
                    for (std::size_t i = 0; i < cb; ++i) gb[n * cb + i] += src[ca + i];
            }
        });
    }
    return result;
}

Tensor sum(const Tensor& x) {
    require_defined(x, "sum");
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    Tensor result = make_output("sum", Shape{1, 1, 1, 1}, {acc});
    if (should_record({&x})) {
        record("sum", result, [xi = x.impl()](const Grad& go) {
            double* gx = grad_buffer(xi);
            if (gx == nullptr) return;
            for (std::size_t i = 0; i < xi->data.size(); ++i) gx[i] += go[0];
        });
    }
    return result;
}

Tensor mean(const Tensor& x) {
    require_defined(x, "mean");
    if (x.numel() == 0) throw ShapeError("mean: zero-size tensor");
    return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor pointwise(const Tensor& input, const Tensor& other, PointwiseOp op) {
    switch (op) {
        case PointwiseOp::Add: return add(input, other);
        case PointwiseOp::Mul: return mul(input, other);
        case PointwiseOp::Sigmoid: return sigmoid(input);
        case PointwiseOp::Relu: return relu(input);
        case PointwiseOp::Interp2xUp: return interp2x_up(input);
        case PointwiseOp::Interp2xDown: return interp2x_down(input);
    }
    throw DomainError("pointwise: unknown op");
}

Tensor soft_histogram(const Tensor& x, int bins) {
    require_defined(x, "soft_histogram");
    if (bins < 1) throw DomainError("soft_histogram: bins must be positive");
    const Shape s = x.shape();
    const std::size_t plane = s.h * s.w;
    const auto K = static_cast<std::size_t>(bins);
    const double kd = static_cast<double>(bins);

    // Each value lands in one bin with weight 1 - 2|u - center|; the outer halves
    // of the first and last bins are flat so out-of-range values clamp.
    struct Tap {
        std::size_t bin;
        double weight;
        double slope;  // d weight / d value
    };
    auto tap = [K, kd](double v) {
        const double u = v * kd;
        if (u <= 0.5) return Tap{0, 1.0, 0.0};
        if (u >= kd - 0.5) return Tap{K - 1, 1.0, 0.0};
        const auto bin = static_cast<std::size_t>(u);
        const double d = u - (static_cast<double>(bin) + 0.5);
        const double wgt = 1.0 - 2.0 * std::abs(d);
        const double slope = d > 0.0 ? -2.0 * kd : (d < 0.0 ? 2.0 * kd : 0.0);
        return Tap{bin, std::max(wgt, 0.0), slope};
    };

    auto in = x.data();
    const Shape out_shape{s.n, s.c, 1, K};
    std::vector<double> raw(out_shape.numel(), 0.0);
    std::vector<double> mass(s.n * s.c, 0.0);
    for (std::size_t p = 0; p < s.n * s.c; ++p) {
        for (std::size_t i = 0; i < plane; ++i) {
            const Tap t = tap(in[p * plane + i]);
            raw[p * K + t.bin] += t.weight;
        }
        for (std::size_t k = 0; k < K; ++k) mass[p] += raw[p * K + k];
    }
    std::vector<double> out(raw.size(), 0.0);
    for (std::size_t p = 0; p < s.n * s.c; ++p) {
        if (mass[p] <= 0.0) continue;
        for (std::size_t k = 0; k < K; ++k) out[p * K + k] = raw[p * K + k] / mass[p];
    }
    Tensor result = make_output("soft_histogram", out_shape, std::move(out));
    if (should_record({&x})) {
        record("soft_histogram", result,
               [s, K, tap, mass = std::move(mass), xi = x.impl(),
                yi = std::weak_ptr<Impl>(result.impl())](const Grad& go) {
                   double* gx = grad_buffer(xi);
                   if (gx == nullptr) return;
                   auto y = yi.lock();
                   const std::size_t plane = s.h * s.w;
                   std::vector<double> graw(K);
                   for (std::size_t p = 0; p < s.n * s.c; ++p) {
                       if (mass[p] <= 0.0) continue;
                       double dot = 0.0;
                       for (std::size_t k = 0; k < K; ++k) dot += go[p * K + k] * y->data[p * K + k];
                       for (std::size_t k = 0; k < K; ++k) graw[k] = (go[p * K + k] - dot) / mass[p];
                       for (std::size_t i = 0; i < plane; ++i) {
                           const Tap t = tap(xi->data[p * plane + i]);
                           gx[p * plane + i] += graw[t.bin] * t.slope;
                       }
                   }
               });
    }
    return result;
}

}  // namespace revive
