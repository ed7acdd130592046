#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "latsteer/tensor.hpp"

namespace latsteer {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    // Throws ConfigError: lr, eps > 0 and betas in [0,1).
    void validate() const;
};

// Adam over a fixed list of tensors, updated in place. Moments start at zero
// and bias corrections use 1 - beta^t for the 1-based step t.
class Adam {
public:
    Adam(AdamConfig cfg, std::vector<Tensor*> params);

    // grads[i] must have the shape of params[i].
    void step(std::span<const Tensor* const> grads);
    std::size_t steps() const noexcept { return t_; }

private:
    AdamConfig cfg_;
    std::vector<Tensor*> params_;
    std::vector<Tensor> m_, v_;
    std::size_t t_ = 0;
};

}  // namespace latsteer
