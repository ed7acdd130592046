#pragma once

// Pretraining of the two frozen prerequisites: an MLP GAN on the blocks
// images and a supervised classifier on 2x upsampled images.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latsteer/nets.hpp"
#include "latsteer/optim.hpp"
#include "latsteer/synthdata.hpp"

namespace latsteer {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    std::size_t d_steps_per_g_step = 1;  // GAN only
    // GAN only; unset means learning_rate. A slower discriminator keeps the
    // generator from dropping modes.
    std::optional<double> discriminator_learning_rate;

    // Throws ConfigError; batch_size must not exceed dataset_size.
    void validate(std::size_t dataset_size) const;
    AdamConfig adam() const { return {learning_rate, beta1, beta2, eps}; }
    AdamConfig discriminator_adam() const {
        return {discriminator_learning_rate.value_or(learning_rate), beta1, beta2, eps};
    }
};

struct GanEpoch {
    std::size_t epoch = 0;
    double loss_d = 0.0;
    double loss_g = 0.0;
};

struct GanResult {
    GeneratorNet generator;
    DiscriminatorNet discriminator;
    std::vector<GanEpoch> history;
    // Frechet distance between pooled real pixels and pooled samples from the
    // untrained and the trained generator, same latents for both.
    double fd_initial = 0.0;
    double fd_final = 0.0;
};

// Alternating Adam updates: d_steps_per_g_step discriminator steps on
//   softplus(-D(real)) + softplus(D(G(z)))
// then one generator step on softplus(-D(G(z))), all batch means. Each epoch
// visits floor(N / batch_size) shuffled batches. Throws TrainingError on a
// non-finite value.
GanResult train_gan(const Dataset& ds, const TrainConfig& cfg);

struct ClassifierEpoch {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct ClassifierResult {
    ClassifierNet classifier;
    std::vector<ClassifierEpoch> history;
};

// Minimizes softmax_cce on nearest-upsampled (x2) images with Adam.
ClassifierResult train_classifier(const Dataset& train, const Dataset& val, const TrainConfig& cfg);

std::string to_csv(const std::vector<GanEpoch>& history);
std::string to_csv(const std::vector<ClassifierEpoch>& history);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace latsteer
