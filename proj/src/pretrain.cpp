#include "latsteer/pretrain.hpp"

#include <charconv>
#include <cmath>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"
#include "latsteer/ops.hpp"

namespace latsteer {
namespace {

constexpr std::size_t kFdSamples = 1000;

Tensor gather_images(const Dataset& ds, std::span<const std::size_t> idx) {
    const std::size_t px = ds.height() * ds.width();
    Tensor out({idx.size(), ds.height(), ds.width()});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(ds.images.raw() + idx[i] * px, px, out.raw() + i * px);
    }
    return out;
}

Tensor gather_one_hot(const Dataset& ds, std::span<const std::size_t> idx) {
    Tensor out({idx.size(), ds.num_classes});
    for (std::size_t i = 0; i < idx.size(); ++i) out.at(i, ds.labels[idx[i]]) = 1.0;
    return out;
}

Tensor normal_tensor(Rng& rng, Shape shape) {
    Tensor t(std::move(shape));
    rng.fill_normal(t.data());
    return t;
}

std::vector<const Tensor*> grads_of(const std::vector<Var>& leaves) {
    std::vector<const Tensor*> out;
    for (const Var& v : leaves) out.push_back(&v.grad());
    return out;
}

// -log sigmoid(x) for the positive side, -log(1 - sigmoid(x)) for the negative.
Var softplus_mean(Var x, double sign) {
    return mean(activation(Activation::softplus, scale(x, sign)));
}

[[noreturn]] void training_failure(const char* stage, std::size_t epoch, std::size_t step, const std::string& why) {
    throw TrainingError(std::string(stage) + " diverged at epoch " + std::to_string(epoch) + ", step " +
                        std::to_string(step) + ": " + why);
}

double checked(double loss, const char* stage, std::size_t epoch, std::size_t step) {
    if (!std::isfinite(loss)) training_failure(stage, epoch, step, "non-finite loss");
    return loss;
}

double accuracy(const ClassifierNet& clf, const Dataset& ds) {
    const auto pred = classify(clf, ds.images);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == ds.labels[i];
    return static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace

void TrainConfig::validate(std::size_t dataset_size) const {
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (batch_size > dataset_size) {
        throw ConfigError("batch_size " + std::to_string(batch_size) + " exceeds dataset size " +
                          std::to_string(dataset_size));
    }
    if (d_steps_per_g_step == 0) throw ConfigError("d_steps_per_g_step must be >= 1");
    adam().validate();
    discriminator_adam().validate();
}

GanResult train_gan(const Dataset& ds, const TrainConfig& cfg) {
    ds.validate();
    cfg.validate(ds.size());
    if (ds.height() != 8 || ds.width() != 8) throw ShapeError("GAN training needs 8x8 images");

    Rng seeds(cfg.seed);
    GanResult r{GeneratorNet::init(seeds.next_u64()), DiscriminatorNet::init(seeds.next_u64()), {}, 0.0, 0.0};
    Rng rng(seeds.next_u64());
    Rng fd_rng(seeds.next_u64());

    const Tensor real_pooled = pooled_pixels(ds.images);
    const Tensor fd_z = normal_tensor(fd_rng, {kFdSamples, GeneratorNet::latent_dim});
    r.fd_initial = frechet_distance(real_pooled, pooled_pixels(r.generator.forward(fd_z))).distance;

    Adam opt_g(cfg.adam(), r.generator.params.pointers());
    Adam opt_d(cfg.discriminator_adam(), r.discriminator.params.pointers());
    const std::size_t b = cfg.batch_size, batches = ds.size() / b;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = rng.permutation(ds.size());
        double sum_d = 0.0, sum_g = 0.0;
        for (std::size_t step = 0; step < batches; ++step) {
            const Tensor real = gather_images(ds, std::span(order).subspan(step * b, b));
            try {
                for (std::size_t k = 0; k < cfg.d_steps_per_g_step; ++k) {
                    const Tensor fake = r.generator.forward(normal_tensor(rng, {b, GeneratorNet::latent_dim}));
                    Graph g;
                    auto dp = bind_parameters(g, r.discriminator.params.tensors());
                    Var loss = add(softplus_mean(r.discriminator.forward(dp, g.constant(real)), -1.0),
                                   softplus_mean(r.discriminator.forward(dp, g.constant(fake)), 1.0));
                    sum_d += checked(loss.value()[0], "GAN discriminator", epoch, step) /
                             static_cast<double>(cfg.d_steps_per_g_step);
                    g.backward(loss);
                    opt_d.step(grads_of(dp));
                }
                Graph g;
                auto gp = bind_parameters(g, r.generator.params.tensors());
                auto dc = bind_constants(g, r.discriminator.params.tensors());
                Var img = r.generator.forward(gp, g.constant(normal_tensor(rng, {b, GeneratorNet::latent_dim})));
                Var loss = softplus_mean(r.discriminator.forward(dc, img), -1.0);
                sum_g += checked(loss.value()[0], "GAN generator", epoch, step);
                g.backward(loss);
                opt_g.step(grads_of(gp));
            } catch (const TrainingError&) {
                throw;
            } catch (const NumericalError& e) {
                training_failure("GAN", epoch, step, e.what());
            }
            for (const auto& p : r.generator.params)
                if (!p.value.all_finite()) training_failure("GAN generator", epoch, step, "non-finite " + p.name);
            for (const auto& p : r.discriminator.params)
                if (!p.value.all_finite()) training_failure("GAN discriminator", epoch, step, "non-finite " + p.name);
        }
        const double n = static_cast<double>(batches);
        r.history.push_back({epoch, sum_d / n, sum_g / n});
    }
    r.fd_final = frechet_distance(real_pooled, pooled_pixels(r.generator.forward(fd_z))).distance;
    return r;
}

ClassifierResult train_classifier(const Dataset& train, const Dataset& val, const TrainConfig& cfg) {
    train.validate();
    val.validate();
    cfg.validate(train.size());
    if (val.num_classes != train.num_classes) throw ValidationError("train and val class counts differ");

    Rng seeds(cfg.seed);
    ClassifierResult r{ClassifierNet::init(train.num_classes, seeds.next_u64()), {}};
    Rng rng(seeds.next_u64());
    Adam opt(cfg.adam(), r.classifier.params.pointers());
    const std::size_t b = cfg.batch_size, batches = train.size() / b;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto order = rng.permutation(train.size());
        double sum = 0.0;
        for (std::size_t step = 0; step < batches; ++step) {
            const auto idx = std::span(order).subspan(step * b, b);
            try {
                Graph g;
                auto p = bind_parameters(g, r.classifier.params.tensors());
                Var img = g.constant(nearest_upsample(gather_images(train, idx), 2));
                Var loss = softmax_cce(r.classifier.forward(p, img).logits, gather_one_hot(train, idx));
                sum += checked(loss.value()[0], "classifier", epoch, step);
                g.backward(loss);
                opt.step(grads_of(p));
            } catch (const TrainingError&) {
                throw;
            } catch (const NumericalError& e) {
                training_failure("classifier", epoch, step, e.what());
            }
        }
        r.history.push_back({epoch, sum / static_cast<double>(batches), accuracy(r.classifier, train),
                             accuracy(r.classifier, val)});
    }
    return r;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string to_csv(const std::vector<GanEpoch>& history) {
    std::string out = "epoch,loss_d,loss_g\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + "," + format_double(e.loss_d) + "," + format_double(e.loss_g) + "\n";
    }
    return out;
}

std::string to_csv(const std::vector<ClassifierEpoch>& history) {
    std::string out = "epoch,loss,train_acc,val_acc\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + "," + format_double(e.loss) + "," + format_double(e.train_acc) + "," +
               format_double(e.val_acc) + "\n";
    }
    return out;
}

}  // namespace latsteer
