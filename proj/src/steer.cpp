#include "latsteer/steer.hpp"

#include <cmath>

#include "latsteer/error.hpp"
#include "latsteer/pretrain.hpp"

namespace latsteer {
namespace {

void check_latent_shapes(const Shape& mu, const Shape& sigma, const Shape& eps) {
    if (mu != sigma || mu != eps) {
        throw ShapeError("latent shapes differ: mu " + to_string(mu) + ", sigma " + to_string(sigma) + ", eps " +
                         to_string(eps));
    }
}

Tensor one_hot_rows(std::span<const std::size_t> labels, std::size_t k) {
    Tensor x({labels.size(), k});
    for (std::size_t i = 0; i < labels.size(); ++i) x.at(i, labels[i]) = 1.0;
    return x;
}

std::vector<double> mean_sigma_per_class(const InputGeneratorNet& ig) {
    std::vector<double> out;
    for (std::size_t k = 0; k < ig.num_classes; ++k) {
        const Tensor sigma = ig.forward(Tensor::one_hot(k, ig.num_classes)).second;
        double s = 0.0;
        for (double v : sigma.data()) s += v;
        out.push_back(s / static_cast<double>(sigma.size()));
    }
    return out;
}

}  // namespace

void ConditioningConfig::validate() const {
    if (epochs == 0) throw ConfigError("steer epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("steer batch_size must be >= 1");
    if (steps_per_epoch == 0) throw ConfigError("steer steps_per_epoch must be >= 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("steer lambda must be >= 0");
    if (!(sigma_min > 0.0)) throw ConfigError("steer sigma_min must be > 0");
    if (!(target_accuracy > 0.0 && target_accuracy <= 1.0)) throw ConfigError("steer target_accuracy must be in (0,1]");
    adam().validate();
}

Tensor sample_latent(const Tensor& mu, const Tensor& sigma, const Tensor& eps) {
    check_latent_shapes(mu.shape(), sigma.shape(), eps.shape());
    Tensor z(mu.shape());
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw DomainError("sigma must be > 0, got " + std::to_string(sigma[i]));
        z[i] = mu[i] + sigma[i] * eps[i];
    }
    return z;
}

Var sample_latent(Var mu, Var sigma, const Tensor& eps) {
    check_latent_shapes(mu.shape(), sigma.shape(), eps.shape());
    for (double s : sigma.value().data()) {
        if (!(s > 0.0)) throw DomainError("sigma must be > 0, got " + std::to_string(s));
    }
    return add(mu, mul(sigma, mu.graph().constant(eps)));
}

PipelineVars pipeline_forward(const InputGeneratorNet& ig, std::span<const Var> ig_params, const GeneratorNet& gen,
                              std::span<const Var> gen_params, const ClassifierNet& clf,
                              std::span<const Var> clf_params, const Tensor& x, const Tensor& eps) {
    LatentParams lp = ig.forward(ig_params, x);
    PipelineVars out;
    out.mu = lp.mu;
    out.sigma = lp.sigma;
    out.z = sample_latent(lp.mu, lp.sigma, eps);
    out.image = gen.forward(gen_params, out.z);
    out.logits = clf.forward(clf_params, nearest_upsample(out.image, 2)).logits;
    return out;
}

PipelineOutput pipeline_forward(const InputGeneratorNet& ig, const GeneratorNet& gen, const ClassifierNet& clf,
                                const Tensor& x, const Tensor& eps) {
    Graph g;
    auto ip = bind_constants(g, ig.params.tensors());
    auto gp = bind_constants(g, gen.params.tensors());
    auto cp = bind_constants(g, clf.params.tensors());
    const Tensor xb = x.rank() == 1 ? x.reshaped({1, x.size()}) : x;
    const Tensor eb = eps.rank() == 1 ? eps.reshaped({1, eps.size()}) : eps;
    PipelineVars v = pipeline_forward(ig, ip, gen, gp, clf, cp, xb, eb);
    return {{xb, v.mu.value(), v.sigma.value(), eb, v.z.value()}, v.image.value(), softmax(v.logits.value())};
}

Var conditioning_loss(Var logits, const Tensor& x, Var sigma, double lambda) {
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    Var cce = softmax_cce(logits, x);
    if (lambda == 0.0) return cce;
    return sub(cce, scale(mean(log(sigma)), lambda));
}

double conditioning_loss(const Tensor& y_hat, const Tensor& x, const Tensor& sigma, double lambda) {
    if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
    if (y_hat.shape() != x.shape()) {
        throw ShapeError("prediction " + to_string(y_hat.shape()) + " vs target " + to_string(x.shape()));
    }
    require_one_hot(x, "conditioning target");
    const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0), k = x.size() / rows;
    double cce = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < k; ++j)
            if (x[r * k + j] != 0.0) cce -= std::log(y_hat[r * k + j]);
    cce /= static_cast<double>(rows);
    if (lambda == 0.0) return cce;
    double log_sum = 0.0;
    for (double s : sigma.data()) {
        if (!(s > 0.0)) throw DomainError("sigma must be > 0, got " + std::to_string(s));
        log_sum += std::log(s);
    }
    return cce - lambda * (log_sum / static_cast<double>(sigma.size()));
}

ConditioningResult train_input_generator(const ConditioningConfig& cfg, const GeneratorNet& gen,
                                         const ClassifierNet& clf) {
    cfg.validate();
    const std::size_t k = clf.num_classes;
    Rng seeds(cfg.seed);
    ConditioningResult r{InputGeneratorNet::init(k, cfg.sigma_min, seeds.next_u64()), {}, false};
    Rng rng(seeds.next_u64());
    Adam opt(cfg.adam(), r.ig.params.pointers());
    const std::size_t b = cfg.batch_size;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t step = 0; step < cfg.steps_per_epoch; ++step) {
            std::vector<std::size_t> labels(b);
            for (auto& l : labels) l = rng.below(k);
            Tensor eps({b, InputGeneratorNet::latent_dim});
            rng.fill_normal(eps.data());
            const Tensor x = one_hot_rows(labels, k);
            try {
                Graph g;
                auto ip = bind_parameters(g, r.ig.params.tensors());
                auto gp = bind_constants(g, gen.params.tensors());
                auto cp = bind_constants(g, clf.params.tensors());
                PipelineVars v = pipeline_forward(r.ig, ip, gen, gp, clf, cp, x, eps);
                Var loss = conditioning_loss(v.logits, x, v.sigma, cfg.lambda);
                const double lv = loss.value()[0];
                if (!std::isfinite(lv)) throw NumericalError("non-finite loss");
                loss_sum += lv;
                const auto pred = argmax_rows(v.logits.value());
                for (std::size_t i = 0; i < b; ++i) hits += pred[i] == labels[i];
                g.backward(loss);
                std::vector<const Tensor*> grads;
                for (const Var& p : ip) grads.push_back(&p.grad());
                opt.step(grads);
            } catch (const NumericalError& e) {
                throw TrainingError("input generator diverged at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(step) + ": " + e.what());
            }
        }
        ConditioningEpoch row;
        row.epoch = epoch;
        row.loss = loss_sum / static_cast<double>(cfg.steps_per_epoch);
        row.accuracy = static_cast<double>(hits) / static_cast<double>(b * cfg.steps_per_epoch);
        row.mean_sigma = mean_sigma_per_class(r.ig);
        r.history.push_back(row);
        if (row.accuracy >= cfg.target_accuracy) {
            r.reached_target = true;
            break;
        }
    }
    return r;
}

Tensor conditional_sample(const InputGeneratorNet& ig, const GeneratorNet& gen, std::size_t k, std::size_t n,
                          std::uint64_t seed) {
    if (k >= ig.num_classes) {
        throw ValidationError("class " + std::to_string(k) + " out of range for K=" + std::to_string(ig.num_classes));
    }
    if (n == 0) throw ValidationError("conditional_sample needs n >= 1");
    Rng rng(seed);
    Tensor eps({n, InputGeneratorNet::latent_dim});
    rng.fill_normal(eps.data());
    const std::vector<std::size_t> labels(n, k);
    auto [mu, sigma] = ig.forward(one_hot_rows(labels, ig.num_classes));
    return gen.forward(sample_latent(mu, sigma, eps));
}

std::string to_csv(const std::vector<ConditioningEpoch>& history) {
    std::string out = "epoch,loss,frozen_clf_accuracy";
    const std::size_t k = history.empty() ? 0 : history.front().mean_sigma.size();
    for (std::size_t c = 0; c < k; ++c) out += ",mean_sigma_" + std::to_string(c);
    out += "\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + "," + format_double(e.loss) + "," + format_double(e.accuracy);
        for (double s : e.mean_sigma) out += "," + format_double(s);
        out += "\n";
    }
    return out;
}

}  // namespace latsteer
