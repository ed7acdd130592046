#pragma once

// Conditioning a frozen generator through a frozen classifier: an input
// generator maps one-hot labels to (mu, sigma), latents are drawn as
// z = mu + sigma * eps, and the classifier's cross-entropy on the upsampled
// generated image is minimized with respect to the input generator only.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latsteer/nets.hpp"
#include "latsteer/optim.hpp"

namespace latsteer {

struct ConditioningConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    std::size_t steps_per_epoch = 20;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double lambda = 0.0;  // weight of -mean(log sigma)
    double sigma_min = InputGeneratorNet::default_sigma_min;
    std::uint64_t seed = 42;
    double target_accuracy = 0.999;  // early stop threshold on epoch accuracy

    void validate() const;
    AdamConfig adam() const { return {learning_rate, beta1, beta2, eps}; }
};

// One draw of the latent: z = mu + sigma * eps, elementwise. Rows are
// batch items; shapes are [B,K] for x and [B,8] for the rest.
struct LatentSample {
    Tensor x;
    Tensor mu;
    Tensor sigma;
    Tensor eps;
    Tensor z;
};

// Throws ShapeError unless the three shapes agree, DomainError unless sigma > 0.
Tensor sample_latent(const Tensor& mu, const Tensor& sigma, const Tensor& eps);
// Same arithmetic on the tape: dz/dmu = 1, dz/dsigma = eps.
Var sample_latent(Var mu, Var sigma, const Tensor& eps);

struct PipelineVars {
    Var mu;
    Var sigma;
    Var z;
    Var image;   // [B,8,8]
    Var logits;  // [B,K]
};

// ig -> z -> generator -> nearest_upsample(., 2) -> classifier. The three
// parameter lists are the bound leaves of each net; bind the generator and
// classifier with bind_constants so they stay frozen.
PipelineVars pipeline_forward(const InputGeneratorNet& ig, std::span<const Var> ig_params, const GeneratorNet& gen,
                              std::span<const Var> gen_params, const ClassifierNet& clf,
                              std::span<const Var> clf_params, const Tensor& x, const Tensor& eps);

struct PipelineOutput {
    LatentSample sample;
    Tensor image;  // [B,8,8]
    Tensor y_hat;  // [B,K], softmax of the classifier logits
};

PipelineOutput pipeline_forward(const InputGeneratorNet& ig, const GeneratorNet& gen, const ClassifierNet& clf,
                                const Tensor& x, const Tensor& eps);

// softmax_cce(logits, x) - lambda * mean(log sigma). With lambda == 0 this is
// the softmax_cce node itself.
Var conditioning_loss(Var logits, const Tensor& x, Var sigma, double lambda);
// Same quantity from probabilities: mean over rows of -sum x log y_hat.
double conditioning_loss(const Tensor& y_hat, const Tensor& x, const Tensor& sigma, double lambda);

struct ConditioningEpoch {
    std::size_t epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;  // argmax logits == label over the epoch's batches
    std::vector<double> mean_sigma;  // per class, after the epoch
};

struct ConditioningResult {
    InputGeneratorNet ig;
    std::vector<ConditioningEpoch> history;
    bool reached_target = false;
};

// Each step draws batch_size labels uniformly over the K classes and fresh
// eps, and takes one Adam step on the input generator. Stops after the first
// epoch whose accuracy reaches target_accuracy. Throws TrainingError on a
// non-finite value.
ConditioningResult train_input_generator(const ConditioningConfig& cfg, const GeneratorNet& gen,
                                         const ClassifierNet& clf);

// n images of class k from fresh eps drawn with the given seed.
Tensor conditional_sample(const InputGeneratorNet& ig, const GeneratorNet& gen, std::size_t k, std::size_t n,
                          std::uint64_t seed);

std::string to_csv(const std::vector<ConditioningEpoch>& history);

}  // namespace latsteer
