#include "latsteer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latsteer/error.hpp"
#include "latsteer/kernels.hpp"

namespace latsteer {
namespace {

const kernels::KernelTable& K() { return kernels::active_kernels(); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) +
                         " differ");
    }
}

// Numerically stable logistic function.
double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

std::string_view activation_name(Activation kind) {
    switch (kind) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu_0.2";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::softplus: return "softplus";
    }
    return "?";
}

Activation parse_activation(std::string_view name) {
    for (Activation a : {Activation::relu, Activation::leaky_relu, Activation::tanh, Activation::sigmoid,
                         Activation::softplus}) {
        if (activation_name(a) == name) return a;
    }
    throw ConfigError("unknown activation '" + std::string(name) +
                      "' (expected relu, leaky_relu_0.2, tanh, sigmoid or softplus)");
}

double activate(Activation kind, double x) {
    switch (kind) {
        case Activation::relu: return x > 0.0 ? x : 0.0 * x;
        case Activation::leaky_relu: return x > 0.0 ? x : kLeakySlope * x;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return sigmoid(x);
        case Activation::softplus: return softplus(x);
    }
    return x;
}

Var matmul(Var a, Var b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() < 1 || av.rank() > 2 || bv.rank() < 1 || bv.rank() > 2) {
        throw ShapeError("matmul: operands must be rank 1 or 2, got " + to_string(av.shape()) + " and " +
                         to_string(bv.shape()));
    }
    const std::size_t m = av.rank() == 2 ? av.dim(0) : 1;
    const std::size_t k = av.rank() == 2 ? av.dim(1) : av.dim(0);
    const std::size_t kb = bv.dim(0);
    const std::size_t n = bv.rank() == 2 ? bv.dim(1) : 1;
    if (k != kb) {
        throw ShapeError("matmul: inner dimensions disagree for " + to_string(av.shape()) + " x " +
                         to_string(bv.shape()));
    }
    Shape out_shape;
    if (av.rank() == 2) out_shape.push_back(m);
    if (bv.rank() == 2) out_shape.push_back(n);
    if (out_shape.empty()) out_shape.push_back(1);

    Tensor out(out_shape);
    K().gemm_nn(av.raw(), bv.raw(), out.raw(), m, k, n, false);

    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(out), {ia, ib}, [ia, ib, m, k, n](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (Tensor* ga = g.grad_buffer(ia)) K().gemm_nt(gy.raw(), g.value(ib).raw(), ga->raw(), m, n, k, true);
        if (Tensor* gb = g.grad_buffer(ib)) K().gemm_tn(g.value(ia).raw(), gy.raw(), gb->raw(), k, m, n, true);
    });
}

Var add(Var a, Var b) {
    require_same_shape("add", a.value(), b.value());
    Tensor out(a.shape());
    K().add(a.value().raw(), b.value().raw(), out.raw(), out.size());
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (Tensor* ga = g.grad_buffer(ia)) K().axpy(1.0, gy.raw(), ga->raw(), gy.size());
        if (Tensor* gb = g.grad_buffer(ib)) K().axpy(1.0, gy.raw(), gb->raw(), gy.size());
    });
}

Var sub(Var a, Var b) {
    require_same_shape("sub", a.value(), b.value());
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (Tensor* ga = g.grad_buffer(ia)) K().axpy(1.0, gy.raw(), ga->raw(), gy.size());
        if (Tensor* gb = g.grad_buffer(ib)) K().axpy(-1.0, gy.raw(), gb->raw(), gy.size());
    });
}

Var mul(Var a, Var b) {
    require_same_shape("mul", a.value(), b.value());
    Tensor out(a.shape());
    K().mul(a.value().raw(), b.value().raw(), out.raw(), out.size());
    const std::size_t ia = a.id(), ib = b.id();
    return a.graph().record(std::move(out), {ia, ib}, [ia, ib](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (Tensor* ga = g.grad_buffer(ia)) K().mul_acc(gy.raw(), g.value(ib).raw(), ga->raw(), gy.size());
        if (Tensor* gb = g.grad_buffer(ib)) K().mul_acc(gy.raw(), g.value(ia).raw(), gb->raw(), gy.size());
    });
}

Var scale(Var x, double factor) {
    Tensor out(x.shape());
    const Tensor& xv = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * xv[i];
    const std::size_t ix = x.id();
    return x.graph().record(std::move(out), {ix}, [ix, factor](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (Tensor* gx = g.grad_buffer(ix)) K().axpy(factor, gy.raw(), gx->raw(), gy.size());
    });
}

Var add_bias(Var x, Var bias) {
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    if (xv.rank() != 2 || bv.rank() != 1 || xv.dim(1) != bv.dim(0)) {
        throw ShapeError("add_bias: cannot broadcast bias " + to_string(bv.shape()) + " over " +
                         to_string(xv.shape()));
    }
    const std::size_t rows = xv.dim(0), cols = xv.dim(1);
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < rows; ++i) K().add(xv.raw() + i * cols, bv.raw(), out.raw() + i * cols, cols);
    const std::size_t ix = x.id(), ib = bias.id();
    return x.graph().record(std::move(out), {ix, ib}, [ix, ib, rows, cols](Graph& g, std::size_t self) {
        const Tensor& gy = g.grad(self);
        if (Tensor* gx = g.grad_buffer(ix)) K().axpy(1.0, gy.raw(), gx->raw(), gy.size());
        if (Tensor* gb = g.grad_buffer(ib)) {
            for (std::size_t i = 0; i < rows; ++i) K().axpy(1.0, gy.raw() + i * cols, gb->raw(), cols);
        }
    });
}

Var activation(Activation kind, Var x) {
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    const std::size_t n = xv.size();
    switch (kind) {
        case Activation::relu: K().leaky_relu(xv.raw(), out.raw(), n, 0.0); break;
        case Activation::leaky_relu: K().leaky_relu(xv.raw(), out.raw(), n, kLeakySlope); break;
        default:
            for (std::size_t i = 0; i < n; ++i) out[i] = activate(kind, xv[i]);
    }
    const std::size_t ix = x.id();
    return x.graph().record(std::move(out), {ix}, [ix, kind, n](Graph& g, std::size_t self) {
        Tensor* gx = g.grad_buffer(ix);
        if (!gx) return;
        const Tensor& gy = g.grad(self);
        const Tensor& xv = g.value(ix);
        const Tensor& yv = g.value(self);
        switch (kind) {
            case Activation::relu: K().leaky_relu_backward(xv.raw(), gy.raw(), gx->raw(), n, 0.0); break;
            case Activation::leaky_relu:
                K().leaky_relu_backward(xv.raw(), gy.raw(), gx->raw(), n, kLeakySlope);
                break;
            case Activation::tanh:
                for (std::size_t i = 0; i < n; ++i) (*gx)[i] += (1.0 - yv[i] * yv[i]) * gy[i];
                break;
            case Activation::sigmoid:
                for (std::size_t i = 0; i < n; ++i) (*gx)[i] += yv[i] * (1.0 - yv[i]) * gy[i];
                break;
            case Activation::softplus:
                for (std::size_t i = 0; i < n; ++i) (*gx)[i] += sigmoid(xv[i]) * gy[i];
                break;
        }
    });
}

Var log(Var x) {
    const Tensor& xv = x.value();
    Tensor out(xv.shape());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        if (!(xv[i] > 0.0)) {
            throw DomainError("log: entry " + std::to_string(i) + " is " + std::to_string(xv[i]) + ", must be > 0");
        }
        out[i] = std::log(xv[i]);
    }
    const std::size_t ix = x.id();
    return x.graph().record(std::move(out), {ix}, [ix](Graph& g, std::size_t self) {
        Tensor* gx = g.grad_buffer(ix);
        if (!gx) return;
        const Tensor& gy = g.grad(self);
        const Tensor& xv = g.value(ix);
        for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i] / xv[i];
    });
}

Var sum(Var x) {
    double total = 0.0;
    for (double v : x.value().data()) total += v;
    const std::size_t ix = x.id();
    return x.graph().record(Tensor({1}, {total}), {ix}, [ix](Graph& g, std::size_t self) {
        Tensor* gx = g.grad_buffer(ix);
        if (!gx) return;
        const double gy = g.grad(self)[0];
        for (double& v : gx->data()) v += gy;
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    double total = 0.0;
    for (double v : x.value().data()) total += v;
    const std::size_t ix = x.id();
    return x.graph().record(Tensor({1}, {total / static_cast<double>(n)}), {ix}, [ix, n](Graph& g, std::size_t self) {
        Tensor* gx = g.grad_buffer(ix);
        if (!gx) return;
        const double gy = g.grad(self)[0] / static_cast<double>(n);
        for (double& v : gx->data()) v += gy;
    });
}

Var reshape(Var x, Shape shape) {
    Tensor out = x.value().reshaped(std::move(shape));
    const std::size_t ix = x.id();
    return x.graph().record(std::move(out), {ix}, [ix](Graph& g, std::size_t self) {
        Tensor* gx = g.grad_buffer(ix);
        if (!gx) return;
        const Tensor& gy = g.grad(self);
        K().axpy(1.0, gy.raw(), gx->raw(), gy.size());
    });
}

void require_one_hot(const Tensor& t, std::string_view what) {
    if (t.empty() || (t.rank() != 1 && t.rank() != 2)) {
        throw ValidationError(std::string(what) + " must be a [K] or [B,K] one-hot tensor, got " +
                              to_string(t.shape()));
    }
    const std::size_t rows = t.rank() == 2 ? t.dim(0) : 1;
    const std::size_t k = t.size() / rows;
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t ones = 0;
        for (double v : t.data().subspan(r * k, k)) {
            if (v == 1.0) {
                ++ones;
            } else if (v != 0.0) {
                throw ValidationError(std::string(what) + " row " + std::to_string(r) +
                                      " is not one-hot (entry " + std::to_string(v) + ")");
            }
        }
        if (ones != 1) {
            throw ValidationError(std::string(what) + " row " + std::to_string(r) + " has " +
                                  std::to_string(ones) + " hot entries, expected exactly one");
        }
    }
}

Tensor softmax(const Tensor& logits) {
    Tensor out(logits.shape());
    const std::size_t rows = logits.rank() == 2 ? logits.dim(0) : 1;
    const std::size_t k = logits.size() / rows;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* in = logits.raw() + r * k;
        double* o = out.raw() + r * k;
        const double mx = *std::max_element(in, in + k);
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            o[j] = std::exp(in[j] - mx);
            z += o[j];
        }
        for (std::size_t j = 0; j < k; ++j) o[j] /= z;
    }
    return out;
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
    const std::size_t rows = t.rank() == 2 ? t.dim(0) : 1;
    const std::size_t k = t.size() / rows;
    std::vector<std::size_t> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* p = t.raw() + r * k;
        out[r] = static_cast<std::size_t>(std::max_element(p, p + k) - p);
    }
    return out;
}

Var softmax_cce(Var logits, const Tensor& target) {
    const Tensor& lv = logits.value();
    if (lv.empty() || target.empty()) throw ValidationError("softmax_cce: zero classes");
    require_same_shape("softmax_cce", lv, target);
    require_one_hot(target, "softmax_cce target");
    const std::size_t rows = lv.rank() == 2 ? lv.dim(0) : 1;
    const std::size_t k = lv.size() / rows;

    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* l = lv.raw() + r * k;
        const double* t = target.raw() + r * k;
        const double mx = *std::max_element(l, l + k);
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) z += std::exp(l[j] - mx);
        const double lse = mx + std::log(z);
        double row_loss = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (t[j] != 0.0) row_loss -= t[j] * (l[j] - lse);
        }
        total += row_loss;
    }
    const double loss = rows == 1 ? total : total / static_cast<double>(rows);

    const std::size_t il = logits.id();
    return logits.graph().record(Tensor({1}, {loss}), {il}, [il, target, rows, k](Graph& g, std::size_t self) {
        Tensor* gl = g.grad_buffer(il);
        if (!gl) return;
        const double gy = g.grad(self)[0] / static_cast<double>(rows);
        const Tensor p = softmax(g.value(il));
        for (std::size_t i = 0; i < rows * k; ++i) (*gl)[i] += gy * (p[i] - target[i]);
    });
}

Tensor nearest_upsample(const Tensor& img, std::size_t factor) {
    if (factor < 1) throw ValidationError("nearest_upsample: factor must be >= 1");
    if (img.rank() != 2 && img.rank() != 3) {
        throw ShapeError("nearest_upsample: expected [H,W] or [B,H,W], got " + to_string(img.shape()));
    }
    const std::size_t batch = img.rank() == 3 ? img.dim(0) : 1;
    const std::size_t h = img.dim(img.rank() - 2), w = img.dim(img.rank() - 1);
    Shape out_shape = img.shape();
    out_shape[out_shape.size() - 2] = h * factor;
    out_shape[out_shape.size() - 1] = w * factor;
    Tensor out(out_shape);
    const std::size_t oh = h * factor, ow = w * factor;
    for (std::size_t b = 0; b < batch; ++b) {
        const double* src = img.raw() + b * h * w;
        double* dst = out.raw() + b * oh * ow;
        for (std::size_t i = 0; i < oh; ++i)
            for (std::size_t j = 0; j < ow; ++j) dst[i * ow + j] = src[(i / factor) * w + j / factor];
    }
    return out;
}

Var nearest_upsample(Var img, std::size_t factor) {
    Tensor out = nearest_upsample(img.value(), factor);
    const Tensor& iv = img.value();
    const std::size_t batch = iv.rank() == 3 ? iv.dim(0) : 1;
    const std::size_t h = iv.dim(iv.rank() - 2), w = iv.dim(iv.rank() - 1);
    const std::size_t ii = img.id();
    return img.graph().record(std::move(out), {ii}, [ii, batch, h, w, factor](Graph& g, std::size_t self) {
        Tensor* gi = g.grad_buffer(ii);
        if (!gi) return;
        const Tensor& gy = g.grad(self);
        const std::size_t oh = h * factor, ow = w * factor;
        for (std::size_t b = 0; b < batch; ++b) {
            const double* src = gy.raw() + b * oh * ow;
            double* dst = gi->raw() + b * h * w;
            for (std::size_t i = 0; i < oh; ++i)
                for (std::size_t j = 0; j < ow; ++j) dst[(i / factor) * w + j / factor] += src[i * ow + j];
        }
    });
}

}  // namespace latsteer
