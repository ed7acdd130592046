#pragma once

// The four networks of the pipeline, all plain MLPs over flattened inputs.
//
//   generator        z[8] -> 64 -> 64 -> 64 (tanh hidden, sigmoid out) -> 8x8 image
//   classifier       16x16 image -> 64 -> 16 -> K logits (leaky relu hidden)
//   discriminator    8x8 image -> 64 -> 32 -> 1 logit (leaky relu hidden)
//   input generator  one-hot[K] -> 32 -> 32 (tanh trunk), then two linear
//                    heads 32 -> 8: mu, and sigma = softplus(.) + sigma_min
//
// Weight matrices are stored [fan_in, fan_out] so a batch [B, fan_in] maps
// through x * W + b.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latsteer/autodiff.hpp"
#include "latsteer/ops.hpp"
#include "latsteer/params.hpp"
#include "latsteer/rng.hpp"

namespace latsteer {

struct MlpSpec {
    std::vector<std::size_t> layer_widths;
    Activation hidden_activation = Activation::tanh;
    std::optional<Activation> output_activation;

    void validate() const;
    std::size_t layers() const { return layer_widths.size() - 1; }
    bool operator==(const MlpSpec&) const = default;
};

// Names and shapes of an MLP's tensors in init/serialization order:
// prefix + "layer{i}.weight" [in,out], then prefix + "layer{i}.bias" [out].
std::vector<std::pair<std::string, Shape>> mlp_param_shapes(const MlpSpec& spec, const std::string& prefix = "");

// Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases. Weights
// are drawn layer by layer in row-major order from the given stream.
void append_glorot(Params& params, const MlpSpec& spec, Rng& rng, const std::string& prefix = "");
Params init_params(const MlpSpec& spec, std::uint64_t seed);

struct MlpOutput {
    Var output;
    // Activation feeding the last linear layer (input x for a 1-layer MLP).
    Var penultimate;
};

// params are the bound leaves in mlp_param_shapes order; x is [B, in].
MlpOutput mlp_forward(const MlpSpec& spec, std::span<const Var> params, Var x);

struct GeneratorNet {
    static constexpr std::size_t latent_dim = 8;
    static MlpSpec spec();
    static GeneratorNet init(std::uint64_t seed);

    Params params;

    // z is [8] or [B,8]; image is [8,8] or [B,8,8].
    Var forward(std::span<const Var> bound, Var z) const;
    Tensor forward(const Tensor& z) const;
};

struct ClassifierOutput {
    Var logits;    // [K] or [B,K]
    Var features;  // [16] or [B,16]
};

struct ClassifierNet {
    static constexpr std::size_t input_side = 16;
    static constexpr std::size_t feature_dim = 16;
    static MlpSpec spec(std::size_t num_classes);
    static ClassifierNet init(std::size_t num_classes, std::uint64_t seed);

    std::size_t num_classes = 0;
    Params params;

    // img is [16,16] or [B,16,16]. An 8x8 input is rejected: generator output
    // must be upsampled by 2 first.
    ClassifierOutput forward(std::span<const Var> bound, Var img) const;
    // (logits, features) without gradient tracking.
    std::pair<Tensor, Tensor> forward(const Tensor& img) const;
};

struct DiscriminatorNet {
    static MlpSpec spec();
    static DiscriminatorNet init(std::uint64_t seed);

    Params params;

    // img is [8,8] or [B,8,8]; returns one logit per image ([1] or [B]).
    Var forward(std::span<const Var> bound, Var img) const;
    Tensor forward(const Tensor& img) const;
};

struct LatentParams {
    Var mu;     // [B,8]
    Var sigma;  // [B,8], every entry > sigma_min
};

struct InputGeneratorNet {
    static constexpr std::size_t latent_dim = 8;
    static constexpr std::size_t trunk_width = 32;
    static constexpr double default_sigma_min = 1e-4;

    static MlpSpec trunk_spec(std::size_t num_classes);
    static MlpSpec head_spec();
    static InputGeneratorNet init(std::size_t num_classes, double sigma_min, std::uint64_t seed);

    std::size_t num_classes = 0;
    double sigma_min = default_sigma_min;
    // "trunk.layer*", then "mu_head.layer0.*", then "sigma_head.layer0.*".
    Params params;

    // x is [K] or [B,K], every row one-hot. Outputs are always [B,8].
    LatentParams forward(std::span<const Var> bound, const Tensor& x) const;
    // (mu, sigma) without gradient tracking.
    std::pair<Tensor, Tensor> forward(const Tensor& x) const;
};

}  // namespace latsteer
