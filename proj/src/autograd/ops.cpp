#include "oia/autograd/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "oia/errors.hpp"
#include "oia/simd/kernels.hpp"

namespace oia::ag {
namespace {

std::string dims(const char* op, const std::string& msg) { return std::string(op) + ": " + msg; }

void require_rank(const char* op, const char* name, const Tensor& t, std::size_t rank) {
    if (t.rank() != rank) {
        throw DimensionError(dims(op, std::string(name) + " must have rank " + std::to_string(rank) +
                                          ", got shape " + shape_str(t.shape())));
    }
}

std::size_t pool_begin(std::size_t i, std::size_t in, std::size_t out) { return (i * in) / out; }
std::size_t pool_end(std::size_t i, std::size_t in, std::size_t out) { return ((i + 1) * in + out - 1) / out; }

struct ConvGeometry {
    std::size_t cin, h, w, cout, kh, kw, stride, pad, oh, ow;
    std::size_t patch() const { return cin * kh * kw; }
    std::size_t pixels() const { return oh * ow; }
    bool pointwise() const { return kh == 1 && kw == 1 && stride == 1 && pad == 0; }
};

void im2col(const ConvGeometry& g, const double* in, double* cols) {
    const std::size_t P = g.pixels();
    for (std::size_t c = 0; c < g.cin; ++c) {
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                double* row = cols + ((c * g.kh + ki) * g.kw + kj) * P;
                for (std::size_t oy = 0; oy < g.oh; ++oy) {
                    const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
                    double* dst = row + oy * g.ow;
                    if (iy < 0 || iy >= static_cast<long>(g.h)) {
                        std::fill(dst, dst + g.ow, 0.0);
                        continue;
                    }
                    const double* src = in + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
                    for (std::size_t ox = 0; ox < g.ow; ++ox) {
                        const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
                        dst[ox] = (ix < 0 || ix >= static_cast<long>(g.w)) ? 0.0 : src[ix];
                    }
                }
            }
        }
    }
}

void col2im(const ConvGeometry& g, const double* cols, double* in) {
    const std::size_t P = g.pixels();
    for (std::size_t c = 0; c < g.cin; ++c) {
        for (std::size_t ki = 0; ki < g.kh; ++ki) {
            for (std::size_t kj = 0; kj < g.kw; ++kj) {
                const double* row = cols + ((c * g.kh + ki) * g.kw + kj) * P;
                for (std::size_t oy = 0; oy < g.oh; ++oy) {
                    const long iy = static_cast<long>(oy * g.stride + ki) - static_cast<long>(g.pad);
                    if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
                    double* dst = in + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
                    const double* src = row + oy * g.ow;
                    for (std::size_t ox = 0; ox < g.ow; ++ox) {
                        const long ix = static_cast<long>(ox * g.stride + kj) - static_cast<long>(g.pad);
                        if (ix >= 0 && ix < static_cast<long>(g.w)) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

}  // namespace

double sigmoid_value(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double bce_value(double z, int t) noexcept {
    return std::max(z, 0.0) - z * static_cast<double>(t) + std::log1p(std::exp(-std::abs(z)));
}

Var conv2d(Var input, Var weight, Var bias, std::size_t stride, std::size_t padding) {
    const Tensor& x = input.value();
    const Tensor& wt = weight.value();
    const Tensor& b = bias.value();
    require_rank("conv2d", "input", x, 3);
    require_rank("conv2d", "weight", wt, 4);
    require_rank("conv2d", "bias", b, 1);
    if (stride == 0) throw DimensionError("conv2d: stride must be positive");
    ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), wt.dim(0), wt.dim(2), wt.dim(3), stride, padding, 0, 0};
    if (wt.dim(1) != g.cin) {
        throw DimensionError(dims("conv2d", "weight axis 1 (C_in=" + std::to_string(wt.dim(1)) +
                                                ") != input axis 0 (C_in=" + std::to_string(g.cin) + ")"));
    }
    if (b.dim(0) != g.cout) {
        throw DimensionError(dims("conv2d", "bias axis 0 (" + std::to_string(b.dim(0)) +
                                                ") != weight axis 0 (C_out=" + std::to_string(g.cout) + ")"));
    }
    if (g.kh > g.h + 2 * padding || g.kw > g.w + 2 * padding) {
        throw DimensionError(dims("conv2d", "kernel " + std::to_string(g.kh) + "x" + std::to_string(g.kw) +
                                                " exceeds padded input axes 1,2 of " + shape_str(x.shape())));
    }
    g.oh = (g.h + 2 * padding - g.kh) / stride + 1;
    g.ow = (g.w + 2 * padding - g.kw) / stride + 1;

    const std::size_t P = g.pixels();
    const std::size_t K = g.patch();
    auto cols = std::make_shared<std::vector<double>>();
    const double* colp = x.data();
    if (!g.pointwise()) {
        cols->resize(K * P);
        im2col(g, x.data(), cols->data());
        colp = cols->data();
    }

    Tensor out(Shape{g.cout, g.oh, g.ow});
    for (std::size_t co = 0; co < g.cout; ++co) std::fill_n(out.data() + co * P, P, b[co]);
    simd::gemm_nn(g.cout, P, K, wt.data(), colp, out.data());

    const Var ops[] = {input, weight, bias};
    return input.tape().record(std::move(out), ops, [input, weight, bias, g, cols](Tape& tape, const Tensor&, std::span<const double> gout) {
        const std::size_t P = g.pixels();
        const std::size_t K = g.patch();
        const double* colp = g.pointwise() ? input.value().data() : cols->data();
        const auto& kt = simd::active();
        if (bias.requires_grad()) {
            auto gb = tape.grad_buffer(bias.id());
            for (std::size_t co = 0; co < g.cout; ++co) gb[co] += kt.sum(gout.data() + co * P, P);
        }
        if (weight.requires_grad()) {
            auto gw = tape.grad_buffer(weight.id());
            simd::gemm_nt(g.cout, K, P, gout.data(), colp, gw.data());
        }
        if (input.requires_grad()) {
            auto gx = tape.grad_buffer(input.id());
            if (g.pointwise()) {
                simd::gemm_tn(K, P, g.cout, weight.value().data(), gout.data(), gx.data());
            } else {
                std::vector<double> gcols(K * P, 0.0);
                simd::gemm_tn(K, P, g.cout, weight.value().data(), gout.data(), gcols.data());
                col2im(g, gcols.data(), gx.data());
            }
        }
    });
}

Var linear(Var input, Var weight, Var bias) {
    const Tensor& x = input.value();
    const Tensor& wt = weight.value();
    const Tensor& b = bias.value();
    require_rank("linear", "input", x, 1);
    require_rank("linear", "weight", wt, 2);
    require_rank("linear", "bias", b, 1);
    const std::size_t dout = wt.dim(0);
    const std::size_t din = wt.dim(1);
    if (x.dim(0) != din) {
        throw DimensionError(dims("linear", "input axis 0 (" + std::to_string(x.dim(0)) + ") != weight axis 1 (" +
                                                std::to_string(din) + ")"));
    }
    if (b.dim(0) != dout) {
        throw DimensionError(dims("linear", "bias axis 0 (" + std::to_string(b.dim(0)) + ") != weight axis 0 (" +
                                                std::to_string(dout) + ")"));
    }
    const auto& kt = simd::active();
    Tensor out(Shape{dout});
    for (std::size_t j = 0; j < dout; ++j) out[j] = kt.dot(wt.data() + j * din, x.data(), din) + b[j];

    const Var ops[] = {input, weight, bias};
    return input.tape().record(std::move(out), ops, [input, weight, bias, din, dout](Tape& tape, const Tensor&, std::span<const double> gout) {
        const auto& kt = simd::active();
        if (bias.requires_grad()) {
            auto gb = tape.grad_buffer(bias.id());
            for (std::size_t j = 0; j < dout; ++j) gb[j] += gout[j];
        }
        if (weight.requires_grad()) {
            auto gw = tape.grad_buffer(weight.id());
            const double* xv = input.value().data();
            for (std::size_t j = 0; j < dout; ++j) {
                if (gout[j] != 0.0) kt.axpy(gout[j], xv, gw.data() + j * din, din);
            }
        }
        if (input.requires_grad()) {
            auto gx = tape.grad_buffer(input.id());
            const double* wv = weight.value().data();
            for (std::size_t j = 0; j < dout; ++j) {
                if (gout[j] != 0.0) kt.axpy(gout[j], wv + j * din, gx.data(), din);
            }
        }
    });
}

Var relu(Var x) {
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = xv[i] <= 0.0 ? 0.0 : xv[i];  // NaN propagates
    const Var ops[] = {x};
    return x.tape().record(std::move(out), ops, [x](Tape& tape, const Tensor&, std::span<const double> gout) {
        const Tensor& xv = x.value();
        auto gx = tape.grad_buffer(x.id());
        for (std::size_t i = 0; i < gx.size(); ++i) {
            if (xv[i] > 0.0) gx[i] += gout[i];
        }
    });
}

Var sigmoid(Var x) {
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = sigmoid_value(xv[i]);
    const Var ops[] = {x};
    return x.tape().record(std::move(out), ops, [x](Tape& tape, const Tensor& y, std::span<const double> gout) {
        auto gx = tape.grad_buffer(x.id());
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * y[i] * (1.0 - y[i]);
    });
}

Var softmax(Var x) {
    const Tensor& xv = x.value();
    require_rank("softmax", "input", xv, 1);
    const double mx = *std::max_element(xv.values().begin(), xv.values().end());
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = std::exp(xv[i] - mx);
    // Summing in sorted order makes the result independent of input order.
    std::vector<double> sorted(out.values().begin(), out.values().end());
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    for (double v : sorted) total += v;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] /= total;
    const Var ops[] = {x};
    return x.tape().record(std::move(out), ops, [x](Tape& tape, const Tensor& y, std::span<const double> gout) {
        const auto& kt = simd::active();
        const double inner = kt.dot(gout.data(), y.data(), y.numel());
        auto gx = tape.grad_buffer(x.id());
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += y[i] * (gout[i] - inner);
    });
}

Var adaptive_avg_pool2d(Var x, std::size_t out_h, std::size_t out_w) {
    const Tensor& xv = x.value();
    require_rank("adaptive_avg_pool2d", "input", xv, 3);
    const std::size_t C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
    if (out_h == 0 || out_w == 0) throw DimensionError("adaptive_avg_pool2d: output extents must be positive");
    if (out_h > H || out_w > W) {
        throw DimensionError("adaptive_avg_pool2d: output " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                             " larger than input axes 1,2 of " + shape_str(xv.shape()));
    }
    Tensor out(Shape{C, out_h, out_w});
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < out_h; ++i) {
            const std::size_t r0 = pool_begin(i, H, out_h), r1 = pool_end(i, H, out_h);
            for (std::size_t j = 0; j < out_w; ++j) {
                const std::size_t c0 = pool_begin(j, W, out_w), c1 = pool_end(j, W, out_w);
                double acc = 0.0;
                for (std::size_t r = r0; r < r1; ++r) {
                    for (std::size_t q = c0; q < c1; ++q) acc += xv.at(c, r, q);
                }
                out.at(c, i, j) = acc / static_cast<double>((r1 - r0) * (c1 - c0));
            }
        }
    }
    const Var ops[] = {x};
    return x.tape().record(std::move(out), ops, [x, C, H, W, out_h, out_w](Tape& tape, const Tensor&, std::span<const double> gout) {
        auto gx = tape.grad_buffer(x.id());
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t i = 0; i < out_h; ++i) {
                const std::size_t r0 = pool_begin(i, H, out_h), r1 = pool_end(i, H, out_h);
                for (std::size_t j = 0; j < out_w; ++j) {
                    const std::size_t c0 = pool_begin(j, W, out_w), c1 = pool_end(j, W, out_w);
                    const double g = gout[(c * out_h + i) * out_w + j] / static_cast<double>((r1 - r0) * (c1 - c0));
                    for (std::size_t r = r0; r < r1; ++r) {
                        for (std::size_t q = c0; q < c1; ++q) gx[(c * H + r) * W + q] += g;
                    }
                }
            }
        }
    });
}

Var concat_channels(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require_rank("concat_channels", "a", av, 3);
    require_rank("concat_channels", "b", bv, 3);
    if (av.dim(1) != bv.dim(1) || av.dim(2) != bv.dim(2)) {
        throw DimensionError("concat_channels: spatial axes 1,2 differ: " + shape_str(av.shape()) + " vs " +
                             shape_str(bv.shape()));
    }
    const Var parts[] = {a, b};
    return concat(parts);
}

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw DimensionError("concat: no operands");
    const Tensor& first = parts[0].value();
    Shape shape = first.shape();
    std::size_t rows = 0;
    for (const Var& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != shape.size() || !std::equal(s.begin() + 1, s.end(), shape.begin() + 1)) {
            throw DimensionError("concat: trailing axes differ: " + shape_str(s) + " vs " + shape_str(shape));
        }
        rows += s[0];
    }
    shape[0] = rows;
    Tensor out(shape);
    std::size_t offset = 0;
    for (const Var& p : parts) {
        const Tensor& v = p.value();
        std::copy(v.values().begin(), v.values().end(), out.data() + offset);
        offset += v.numel();
    }
    std::vector<Var> keep(parts.begin(), parts.end());
    return parts[0].tape().record(std::move(out), parts, [keep](Tape& tape, const Tensor&, std::span<const double> gout) {
        std::size_t offset = 0;
        for (const Var& p : keep) {
            const std::size_t n = p.numel();
            if (p.requires_grad()) {
                auto gp = tape.grad_buffer(p.id());
                for (std::size_t i = 0; i < n; ++i) gp[i] += gout[offset + i];
            }
            offset += n;
        }
    });
}

Var slice(Var x, std::size_t begin, std::size_t end) {
    const Tensor& xv = x.value();
    if (xv.rank() == 0 || begin >= end || end > xv.dim(0)) {
        throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                             ") invalid for axis 0 of " + shape_str(xv.shape()));
    }
    Shape shape = xv.shape();
    const std::size_t inner = xv.numel() / shape[0];
    shape[0] = end - begin;
    std::vector<double> vals(xv.values().begin() + static_cast<std::ptrdiff_t>(begin * inner),
                             xv.values().begin() + static_cast<std::ptrdiff_t>(end * inner));
    const Var ops[] = {x};
    return x.tape().record(Tensor(std::move(shape), std::move(vals)), ops,
                           [x, offset = begin * inner](Tape& tape, const Tensor&, std::span<const double> gout) {
                               auto gx = tape.grad_buffer(x.id());
                               for (std::size_t i = 0; i < gout.size(); ++i) gx[offset + i] += gout[i];
                           });
}

Var reshape(Var x, Shape shape) {
    const Tensor& xv = x.value();
    if (shape_numel(shape) != xv.numel()) {
        throw DimensionError("reshape: " + shape_str(xv.shape()) + " cannot become " + shape_str(shape));
    }
    const Var ops[] = {x};
    return x.tape().record(xv.reshaped(std::move(shape)), ops, [x](Tape& tape, const Tensor&, std::span<const double> gout) {
        auto gx = tape.grad_buffer(x.id());
        simd::active().axpy(1.0, gout.data(), gx.data(), gx.size());
    });
}

Var add(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.shape() != bv.shape()) {
        throw DimensionError("add: shapes differ: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
    }
    Tensor out = av.reshaped(av.shape());
    simd::active().axpy(1.0, bv.data(), out.data(), out.numel());
    const Var ops[] = {a, b};
    return a.tape().record(std::move(out), ops, [a, b](Tape& tape, const Tensor&, std::span<const double> gout) {
        const auto& kt = simd::active();
        if (a.requires_grad()) kt.axpy(1.0, gout.data(), tape.grad_buffer(a.id()).data(), gout.size());
        if (b.requires_grad()) kt.axpy(1.0, gout.data(), tape.grad_buffer(b.id()).data(), gout.size());
    });
}

Var scale(Var x, Var s) {
    const Tensor& xv = x.value();
    if (s.numel() != 1) throw DimensionError("scale: factor must have one element, got " + shape_str(s.shape()));
    const double f = s.value()[0];
    Tensor out = xv.reshaped(xv.shape());
    simd::active().scale(f, out.data(), out.numel());
    const Var ops[] = {x, s};
    return x.tape().record(std::move(out), ops, [x, s](Tape& tape, const Tensor&, std::span<const double> gout) {
        const auto& kt = simd::active();
        if (x.requires_grad()) kt.axpy(s.value()[0], gout.data(), tape.grad_buffer(x.id()).data(), gout.size());
        if (s.requires_grad()) tape.grad_buffer(s.id())[0] += kt.dot(gout.data(), x.value().data(), gout.size());
    });
}

Var mul(Var x, double c) {
    Tensor out = x.value().reshaped(x.shape());
    simd::active().scale(c, out.data(), out.numel());
    const Var ops[] = {x};
    return x.tape().record(std::move(out), ops, [x, c](Tape& tape, const Tensor&, std::span<const double> gout) {
        simd::active().axpy(c, gout.data(), tape.grad_buffer(x.id()).data(), gout.size());
    });
}

Var pick(Var x, std::size_t i) {
    if (i >= x.numel()) {
        throw DimensionError("pick: index " + std::to_string(i) + " out of range for " + shape_str(x.shape()));
    }
    const Var ops[] = {x};
    return x.tape().record(Tensor::scalar(x.value()[i]), ops, [x, i](Tape& tape, const Tensor&, std::span<const double> gout) {
        tape.grad_buffer(x.id())[i] += gout[0];
    });
}

Var sum(Var x) {
    const Tensor& xv = x.value();
    const Var ops[] = {x};
    return x.tape().record(Tensor::scalar(simd::active().sum(xv.data(), xv.numel())), ops,
                           [x](Tape& tape, const Tensor&, std::span<const double> gout) {
                               auto gx = tape.grad_buffer(x.id());
                               for (double& g : gx) g += gout[0];
                           });
}

Var bce_with_logits(Var logits, std::span<const int> targets) {
    const Tensor& z = logits.value();
    if (targets.size() != z.numel()) {
        throw DimensionError("bce_with_logits: " + std::to_string(targets.size()) + " targets for " +
                             std::to_string(z.numel()) + " logits");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i] != 0 && targets[i] != 1) {
            throw std::invalid_argument("bce_with_logits: target " + std::to_string(i) + " is " +
                                        std::to_string(targets[i]) + ", expected 0 or 1");
        }
        total += bce_value(z[i], targets[i]);
    }
    std::vector<int> t(targets.begin(), targets.end());
    const Var ops[] = {logits};
    return logits.tape().record(Tensor::scalar(total), ops, [logits, t = std::move(t)](Tape& tape, const Tensor&, std::span<const double> gout) {
        const Tensor& z = logits.value();
        auto gz = tape.grad_buffer(logits.id());
        for (std::size_t i = 0; i < t.size(); ++i) gz[i] += gout[0] * (sigmoid_value(z[i]) - static_cast<double>(t[i]));
    });
}

Var cross_entropy_with_logits(Var logits, std::size_t target) {
    const Tensor& z = logits.value();
    require_rank("cross_entropy_with_logits", "logits", z, 1);
    if (target >= z.numel()) {
        throw DimensionError("cross_entropy_with_logits: target " + std::to_string(target) + " out of range for " +
                             shape_str(z.shape()));
    }
    const double mx = *std::max_element(z.values().begin(), z.values().end());
    double total = 0.0;
    for (double v : z.values()) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    const Var ops[] = {logits};
    return logits.tape().record(Tensor::scalar(lse - z[target]), ops,
                                [logits, target, lse](Tape& tape, const Tensor&, std::span<const double> gout) {
                                    const Tensor& z = logits.value();
                                    auto gz = tape.grad_buffer(logits.id());
                                    for (std::size_t i = 0; i < gz.size(); ++i) {
                                        const double p = std::exp(z[i] - lse);
                                        gz[i] += gout[0] * (p - (i == target ? 1.0 : 0.0));
                                    }
                                });
}

}  // namespace oia::ag
