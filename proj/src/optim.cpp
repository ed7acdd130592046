#include "latsteer/optim.hpp"

#include <cmath>

#include "latsteer/error.hpp"
#include "latsteer/kernels.hpp"

namespace latsteer {

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("adam learning_rate must be > 0");
    if (!(eps > 0.0)) throw ConfigError("adam eps must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam beta1 must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam beta2 must be in [0,1)");
}

Adam::Adam(AdamConfig cfg, std::vector<Tensor*> params) : cfg_(cfg), params_(std::move(params)) {
    cfg_.validate();
    for (const Tensor* p : params_) {
        m_.emplace_back(p->shape());
        v_.emplace_back(p->shape());
    }
}

void Adam::step(std::span<const Tensor* const> grads) {
    if (grads.size() != params_.size()) {
        throw ValidationError("adam: got " + std::to_string(grads.size()) + " gradients for " +
                              std::to_string(params_.size()) + " parameters");
    }
    ++t_;
    const double t = static_cast<double>(t_);
    const kernels::AdamCoeffs c{cfg_.learning_rate, cfg_.beta1, cfg_.beta2, cfg_.eps,
                                1.0 - std::pow(cfg_.beta1, t), 1.0 - std::pow(cfg_.beta2, t)};
    const auto& k = kernels::active_kernels();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (grads[i]->shape() != params_[i]->shape()) {
            throw ShapeError("adam: gradient " + to_string(grads[i]->shape()) + " for parameter " +
                             to_string(params_[i]->shape()));
        }
        k.adam_update(params_[i]->raw(), m_[i].raw(), v_[i].raw(), grads[i]->raw(), params_[i]->size(), c);
    }
}

}  // namespace latsteer
