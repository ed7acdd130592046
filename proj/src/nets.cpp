#include "latsteer/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "latsteer/error.hpp"

namespace latsteer {
namespace {

std::string layer_name(const std::string& prefix, std::size_t i, const char* what) {
    return prefix + "layer" + std::to_string(i) + "." + what;
}

std::span<const Var> slice(std::span<const Var> all, std::size_t offset, std::size_t count) {
    if (offset + count > all.size()) throw ValidationError("not enough bound parameters for network");
    return all.subspan(offset, count);
}

// sigma_min + softplus(x), never equal to sigma_min: once softplus(x) drops
// below half an ulp of sigma_min the sum is bumped to the next double.
Var softplus_above(Var x, double floor) {
    const double least = std::nextafter(floor, std::numeric_limits<double>::infinity());
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::max(floor + activate(Activation::softplus, x.value()[i]), least);
    }
    const std::size_t ix = x.id();
    return x.graph().record(std::move(out), {ix}, [ix](Graph& g, std::size_t self) {
        Tensor* gx = g.grad_buffer(ix);
        if (!gx) return;
        const Tensor& gy = g.grad(self);
        const Tensor& xv = g.value(ix);
        for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += activate(Activation::sigmoid, xv[i]) * gy[i];
    });
}

}  // namespace

void MlpSpec::validate() const {
    if (layer_widths.size() < 2) throw ConfigError("MLP needs at least two layer widths");
    for (std::size_t w : layer_widths) {
        if (w == 0) throw ConfigError("MLP layer widths must be positive");
    }
}

std::vector<std::pair<std::string, Shape>> mlp_param_shapes(const MlpSpec& spec, const std::string& prefix) {
    spec.validate();
    std::vector<std::pair<std::string, Shape>> out;
    for (std::size_t i = 0; i < spec.layers(); ++i) {
        out.emplace_back(layer_name(prefix, i, "weight"), Shape{spec.layer_widths[i], spec.layer_widths[i + 1]});
        out.emplace_back(layer_name(prefix, i, "bias"), Shape{spec.layer_widths[i + 1]});
    }
    return out;
}

void append_glorot(Params& params, const MlpSpec& spec, Rng& rng, const std::string& prefix) {
    spec.validate();
    for (std::size_t i = 0; i < spec.layers(); ++i) {
        const std::size_t fan_in = spec.layer_widths[i], fan_out = spec.layer_widths[i + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Tensor w({fan_in, fan_out});
        for (double& v : w.data()) v = rng.uniform(-bound, bound);
        params.add(layer_name(prefix, i, "weight"), std::move(w));
        params.add(layer_name(prefix, i, "bias"), Tensor({fan_out}));
    }
}

Params init_params(const MlpSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    Params p;
    append_glorot(p, spec, rng);
    return p;
}

MlpOutput mlp_forward(const MlpSpec& spec, std::span<const Var> params, Var x) {
    if (params.size() != 2 * spec.layers()) {
        throw ValidationError("MLP expects " + std::to_string(2 * spec.layers()) + " bound tensors, got " +
                              std::to_string(params.size()));
    }
    if (x.value().rank() != 2 || x.value().dim(1) != spec.layer_widths.front()) {
        throw ShapeError("MLP input must be [B," + std::to_string(spec.layer_widths.front()) + "], got " +
                         to_string(x.shape()));
    }
    Var h = x;
    Var penultimate = x;
    for (std::size_t i = 0; i < spec.layers(); ++i) {
        penultimate = h;
        h = add_bias(matmul(h, params[2 * i]), params[2 * i + 1]);
        const bool last = i + 1 == spec.layers();
        if (!last) {
            h = activation(spec.hidden_activation, h);
        } else if (spec.output_activation) {
            h = activation(*spec.output_activation, h);
        }
    }
    return {h, penultimate};
}

// --- generator ---

MlpSpec GeneratorNet::spec() { return {{latent_dim, 64, 64, 64}, Activation::tanh, Activation::sigmoid}; }

GeneratorNet GeneratorNet::init(std::uint64_t seed) { return {init_params(spec(), seed)}; }

Var GeneratorNet::forward(std::span<const Var> bound, Var z) const {
    const Tensor& zv = z.value();
    if (zv.dim(zv.rank() - 1) != latent_dim || zv.rank() > 2) {
        throw ShapeError("generator latent must be [8] or [B,8], got " + to_string(zv.shape()));
    }
    const bool batched = zv.rank() == 2;
    const std::size_t b = batched ? zv.dim(0) : 1;
    Var out = mlp_forward(spec(), bound, reshape(z, {b, latent_dim})).output;
    return batched ? reshape(out, {b, 8, 8}) : reshape(out, {8, 8});
}

Tensor GeneratorNet::forward(const Tensor& z) const {
    Graph g;
    auto bound = bind_constants(g, params.tensors());
    return forward(bound, g.constant(z)).value();
}

// --- classifier ---

MlpSpec ClassifierNet::spec(std::size_t num_classes) {
    return {{input_side * input_side, 64, feature_dim, num_classes}, Activation::leaky_relu, std::nullopt};
}

ClassifierNet ClassifierNet::init(std::size_t num_classes, std::uint64_t seed) {
    return {num_classes, init_params(spec(num_classes), seed)};
}

ClassifierOutput ClassifierNet::forward(std::span<const Var> bound, Var img) const {
    const Tensor& v = img.value();
    const bool shape_ok = (v.rank() == 2 || v.rank() == 3) && v.dim(v.rank() - 1) == input_side &&
                          v.dim(v.rank() - 2) == input_side;
    if (!shape_ok) {
        std::string msg = "classifier expects a 16x16 image ([16,16] or [B,16,16]), got " + to_string(v.shape());
        if (v.rank() >= 2 && v.dim(v.rank() - 1) == 8 && v.dim(v.rank() - 2) == 8) {
            msg += "; upsample 8x8 generator output with nearest_upsample(img, 2) first";
        }
        throw ShapeError(msg);
    }
    const bool batched = v.rank() == 3;
    const std::size_t b = batched ? v.dim(0) : 1;
    MlpOutput out = mlp_forward(spec(num_classes), bound, reshape(img, {b, input_side * input_side}));
    if (batched) return {out.output, out.penultimate};
    return {reshape(out.output, {num_classes}), reshape(out.penultimate, {feature_dim})};
}

std::pair<Tensor, Tensor> ClassifierNet::forward(const Tensor& img) const {
    Graph g;
    auto bound = bind_constants(g, params.tensors());
    ClassifierOutput out = forward(bound, g.constant(img));
    return {out.logits.value(), out.features.value()};
}

// --- discriminator ---

MlpSpec DiscriminatorNet::spec() { return {{64, 64, 32, 1}, Activation::leaky_relu, std::nullopt}; }

DiscriminatorNet DiscriminatorNet::init(std::uint64_t seed) { return {init_params(spec(), seed)}; }

Var DiscriminatorNet::forward(std::span<const Var> bound, Var img) const {
    const Tensor& v = img.value();
    const bool ok = (v.rank() == 2 || v.rank() == 3) && v.dim(v.rank() - 1) == 8 && v.dim(v.rank() - 2) == 8;
    if (!ok) throw ShapeError("discriminator expects [8,8] or [B,8,8] images, got " + to_string(v.shape()));
    const std::size_t b = v.rank() == 3 ? v.dim(0) : 1;
    Var logits = mlp_forward(spec(), bound, reshape(img, {b, 64})).output;
    return reshape(logits, {b});
}

Tensor DiscriminatorNet::forward(const Tensor& img) const {
    Graph g;
    auto bound = bind_constants(g, params.tensors());
    return forward(bound, g.constant(img)).value();
}

// --- input generator ---

MlpSpec InputGeneratorNet::trunk_spec(std::size_t num_classes) {
    return {{num_classes, trunk_width, trunk_width}, Activation::tanh, Activation::tanh};
}

MlpSpec InputGeneratorNet::head_spec() { return {{trunk_width, latent_dim}, Activation::tanh, std::nullopt}; }

InputGeneratorNet InputGeneratorNet::init(std::size_t num_classes, double sigma_min, std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("input generator needs at least 2 classes");
    if (!(sigma_min > 0.0)) throw ConfigError("sigma_min must be > 0");
    Rng rng(seed);
    InputGeneratorNet net;
    net.num_classes = num_classes;
    net.sigma_min = sigma_min;
    append_glorot(net.params, trunk_spec(num_classes), rng, "trunk.");
    append_glorot(net.params, head_spec(), rng, "mu_head.");
    append_glorot(net.params, head_spec(), rng, "sigma_head.");
    return net;
}

LatentParams InputGeneratorNet::forward(std::span<const Var> bound, const Tensor& x) const {
    if (x.empty() || x.dim(x.rank() - 1) != num_classes || x.rank() > 2) {
        throw ShapeError("input generator expects [" + std::to_string(num_classes) + "] or [B," +
                         std::to_string(num_classes) + "] one-hot input, got " + to_string(x.shape()));
    }
    require_one_hot(x, "input generator class code");
    const std::size_t b = x.rank() == 2 ? x.dim(0) : 1;
    Graph& g = bound.front().graph();
    Var xv = g.constant(x.reshaped({b, num_classes}));
    Var trunk = mlp_forward(trunk_spec(num_classes), slice(bound, 0, 4), xv).output;
    Var mu = mlp_forward(head_spec(), slice(bound, 4, 2), trunk).output;
    Var pre = mlp_forward(head_spec(), slice(bound, 6, 2), trunk).output;
    return {mu, softplus_above(pre, sigma_min)};
}

std::pair<Tensor, Tensor> InputGeneratorNet::forward(const Tensor& x) const {
    Graph g;
    auto bound = bind_constants(g, params.tensors());
    LatentParams out = forward(bound, x);
    return {out.mu.value(), out.sigma.value()};
}

}  // namespace latsteer
