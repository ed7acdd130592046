#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "latsteer/checkpoint.hpp"
#include "latsteer/error.hpp"
#include "latsteer/gradcheck.hpp"
#include "latsteer/steer.hpp"
#include "test_util.hpp"

using namespace latsteer;
using latsteer::testing::random_tensor;

namespace {

struct Nets {
    InputGeneratorNet ig;
    GeneratorNet gen;
    ClassifierNet clf;
};

Nets random_nets(std::uint64_t seed, std::size_t k = 4) {
    return {InputGeneratorNet::init(k, 1e-4, seed), GeneratorNet::init(seed + 1), ClassifierNet::init(k, seed + 2)};
}

}  // namespace

TEST(SampleLatent, ZeroNoiseIsMean) {
    Rng rng(1);
    const Tensor mu = random_tensor(rng, {8});
    const Tensor sigma = random_tensor(rng, {8}, 0.1, 2.0);
    EXPECT_TRUE(sample_latent(mu, sigma, Tensor::zeros({8})).bit_equal(mu));
}

TEST(SampleLatent, HandExample) {
    const Tensor z = sample_latent(Tensor::full({8}, 0.5), Tensor::full({8}, 2.0), Tensor::full({8}, 1.0));
    for (double v : z.data()) EXPECT_EQ(v, 2.5);
}

TEST(SampleLatent, Errors) {
    EXPECT_THROW(sample_latent(Tensor::zeros({8}), Tensor::full({7}, 1.0), Tensor::zeros({8})), ShapeError);
    EXPECT_THROW(sample_latent(Tensor::zeros({2}), Tensor::vector({1.0, 0.0}), Tensor::zeros({2})), DomainError);
}

TEST(SampleLatent, PathwiseDerivatives) {
    Graph g;
    Var mu = g.parameter(Tensor::vector({0.1, -0.4, 2.0}));
    Var sigma = g.parameter(Tensor::vector({0.5, 1.5, 3.0}));
    const Tensor eps = Tensor::vector({1.25, -0.5, 0.0});
    g.backward(sum(sample_latent(mu, sigma, eps)));
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(mu.grad()[i], 1.0);
        EXPECT_EQ(sigma.grad()[i], eps[i]);
    }
}

TEST(SampleLatent, MonteCarloMoments) {
    const std::vector<double> mu{0.0, 1.0, -2.0, 0.5, 3.0, -0.1, 0.25, 10.0};
    const std::vector<double> sd{1.0, 0.1, 2.0, 0.5, 0.01, 3.0, 1.5, 0.7};
    const std::size_t n = 10000;
    Rng rng(77);
    std::vector<double> s1(8, 0.0), s2(8, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor eps({8});
        rng.fill_normal(eps.data());
        const Tensor z = sample_latent(Tensor({8}, mu), Tensor({8}, sd), eps);
        for (std::size_t j = 0; j < 8; ++j) {
            s1[j] += z[j];
            s2[j] += z[j] * z[j];
        }
    }
    for (std::size_t j = 0; j < 8; ++j) {
        const double mean = s1[j] / n;
        const double var = (s2[j] - n * mean * mean) / (n - 1);
        EXPECT_LE(std::abs(mean - mu[j]), 4 * sd[j] / std::sqrt(double(n))) << j;
        EXPECT_LE(std::abs(std::sqrt(var) / sd[j] - 1.0), 0.05) << j;
    }
}

TEST(Pipeline, ProbabilitiesAndReparameterizationIdentity) {
    const Nets nets = random_nets(3);
    Rng rng(4);
    Tensor x({5, 4});
    for (std::size_t i = 0; i < 5; ++i) x.at(i, rng.below(4)) = 1.0;
    const Tensor eps = random_tensor(rng, {5, 8});
    const PipelineOutput out = pipeline_forward(nets.ig, nets.gen, nets.clf, x, eps);
    ASSERT_EQ(out.image.shape(), (Shape{5, 8, 8}));
    for (std::size_t i = 0; i < 5; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < 4; ++k) s += out.y_hat.at(i, k);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < out.sample.z.size(); ++i) {
        EXPECT_GT(out.sample.sigma[i], 0.0);
        worst = std::max(worst, std::abs(out.sample.z[i] - (out.sample.mu[i] + out.sample.sigma[i] * out.sample.eps[i])));
    }
    EXPECT_EQ(worst, 0.0);
}

TEST(Pipeline, FrozenNetsReceiveNoGradient) {
    const Nets nets = random_nets(5);
    Rng rng(6);
    Graph g;
    auto ip = bind_parameters(g, nets.ig.params.tensors());
    auto gp = bind_constants(g, nets.gen.params.tensors());
    auto cp = bind_constants(g, nets.clf.params.tensors());
    const Tensor x = Tensor::matrix({{0, 1, 0, 0}, {0, 0, 0, 1}});
    const PipelineVars v = pipeline_forward(nets.ig, ip, nets.gen, gp, nets.clf, cp, x, random_tensor(rng, {2, 8}));
    g.backward(conditioning_loss(v.logits, x, v.sigma, 0.1));
    for (const Var& p : gp) {
        EXPECT_EQ(g.grad_buffer(p.id()), nullptr);
        for (double d : p.grad().data()) EXPECT_EQ(d, 0.0);
    }
    for (const Var& p : cp) {
        EXPECT_EQ(g.grad_buffer(p.id()), nullptr);
        for (double d : p.grad().data()) EXPECT_EQ(d, 0.0);
    }
    double touched = 0.0;
    for (const Var& p : ip)
        for (double d : p.grad().data()) touched += std::abs(d);
    EXPECT_GT(touched, 0.0);
}

TEST(Pipeline, FullStackGradientCheck) {
    for (std::uint64_t draw = 0; draw < 20; ++draw) {
        Nets nets = random_nets(100 + 3 * draw);
        Rng rng(500 + draw);
        const std::size_t b = 1 + rng.below(3);
        Tensor x({b, 4});
        for (std::size_t i = 0; i < b; ++i) x.at(i, rng.below(4)) = 1.0;
        const Tensor eps = random_tensor(rng, {b, 8});
        const double lambda = draw % 2 == 0 ? 0.0 : 0.1;
        auto f = [&](Graph& g, std::span<const Var> p) {
            auto gp = bind_constants(g, nets.gen.params.tensors());
            auto cp = bind_constants(g, nets.clf.params.tensors());
            const PipelineVars v = pipeline_forward(nets.ig, p, nets.gen, gp, nets.clf, cp, x, eps);
            return conditioning_loss(v.logits, x, v.sigma, lambda);
        };
        const auto report = grad_check(f, nets.ig.params, 1e-4, 1e-4);
        EXPECT_TRUE(report.pass) << "draw " << draw << ": " << report.max_rel_err << " at " << report.worst_param
                                 << "[" << report.worst_index << "]";
    }
}

TEST(ConditioningLoss, UniformPredictionIsLogK) {
    const Tensor y = Tensor::full({4}, 0.25);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(conditioning_loss(y, Tensor::one_hot(k, 4), Tensor::full({8}, 0.3), 0.0), std::log(4.0), 1e-15);
    }
    Graph g;
    Var loss = conditioning_loss(g.constant(Tensor::zeros({4})), Tensor::one_hot(2, 4),
                                 g.constant(Tensor::full({8}, 1.0)), 0.0);
    EXPECT_NEAR(loss.value()[0], 1.386294, 1e-6);
}

TEST(ConditioningLoss, UnitSigmaAddsNothing) {
    Graph g;
    Var logits = g.constant(Tensor::vector({0.3, -1.0, 2.0}));
    const Tensor x = Tensor::one_hot(1, 3);
    const double base = softmax_cce(logits, x).value()[0];
    EXPECT_EQ(conditioning_loss(logits, x, g.constant(Tensor::full({8}, 1.0)), 0.1).value()[0], base);
}

TEST(ConditioningLoss, SigmaEShiftsByLambda) {
    Graph g;
    Var logits = g.constant(Tensor::vector({0.3, -1.0, 2.0}));
    const Tensor x = Tensor::one_hot(0, 3);
    const double base = softmax_cce(logits, x).value()[0];
    const Tensor e = Tensor::full({8}, std::numbers::e);
    EXPECT_NEAR(conditioning_loss(logits, x, g.constant(e), 0.1).value()[0], base - 0.1, 1e-15);
    EXPECT_NEAR(conditioning_loss(softmax(logits.value()), x, e, 0.1), base - 0.1, 1e-12);
}

TEST(ConditioningLoss, ZeroLambdaIsTheCceNode) {
    Graph g;
    Var logits = g.parameter(Tensor::matrix({{0.3, -1.0, 2.0}, {1.0, 1.0, 0.0}}));
    const Tensor x = Tensor::matrix({{0, 0, 1}, {1, 0, 0}});
    Var sigma = g.parameter(Tensor::full({2, 8}, 0.4));
    const std::size_t before = g.size();
    Var loss = conditioning_loss(logits, x, sigma, 0.0);
    EXPECT_EQ(g.size(), before + 1);
    Graph h;
    const double ref = softmax_cce(h.constant(logits.value()), x).value()[0];
    EXPECT_TRUE(loss.value().bit_equal(Tensor::vector({ref})));
    EXPECT_THROW(conditioning_loss(logits, x, sigma, -0.5), ValidationError);
    EXPECT_THROW(conditioning_loss(Tensor::full({3}, 1.0 / 3), Tensor::one_hot(0, 3), Tensor::full({2}, -1.0), 0.1),
                 DomainError);
}

TEST(ConditioningConfig, Validation) {
    ConditioningConfig c;
    EXPECT_NO_THROW(c.validate());
    c.lambda = -0.1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.target_accuracy = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.sigma_min = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(TrainInputGenerator, FrozenNetsUntouchedAndDeterministic) {
    const Nets nets = random_nets(9);
    const std::string gen_before = encode_checkpoint(make_checkpoint(nets.gen, {}));
    const std::string clf_before = encode_checkpoint(make_checkpoint(nets.clf, {}));
    ConditioningConfig c;
    c.epochs = 3;
    c.steps_per_epoch = 5;
    c.batch_size = 16;
    c.seed = 8;
    const auto a = train_input_generator(c, nets.gen, nets.clf);
    const auto b = train_input_generator(c, nets.gen, nets.clf);
    EXPECT_EQ(encode_checkpoint(make_checkpoint(nets.gen, {})), gen_before);
    EXPECT_EQ(encode_checkpoint(make_checkpoint(nets.clf, {})), clf_before);
    EXPECT_TRUE(a.ig.params.bit_equal(b.ig.params));
    EXPECT_EQ(to_csv(a.history), to_csv(b.history));
    EXPECT_FALSE(a.ig.params.bit_equal(InputGeneratorNet::init(4, c.sigma_min, 1).params));
    ASSERT_FALSE(a.history.empty());
    EXPECT_EQ(a.history.front().mean_sigma.size(), 4u);
    EXPECT_EQ(to_csv(a.history).rfind("epoch,loss,frozen_clf_accuracy,mean_sigma_0,", 0), 0u);
}

TEST(TrainInputGenerator, EarlyStopsAtTarget) {
    const Nets nets = random_nets(10);
    ConditioningConfig c;
    c.epochs = 10;
    c.steps_per_epoch = 2;
    c.batch_size = 8;
    c.target_accuracy = 1e-9;
    const auto r = train_input_generator(c, nets.gen, nets.clf);
    EXPECT_TRUE(r.reached_target);
    EXPECT_EQ(r.history.size(), 1u);
}

TEST(ConditionalSample, DeterministicAndChecked) {
    const Nets nets = random_nets(12);
    const Tensor a = conditional_sample(nets.ig, nets.gen, 1, 1, 99);
    const Tensor b = conditional_sample(nets.ig, nets.gen, 1, 1, 99);
    EXPECT_EQ(a.shape(), (Shape{1, 8, 8}));
    EXPECT_TRUE(a.bit_equal(b));
    EXPECT_FALSE(a.bit_equal(conditional_sample(nets.ig, nets.gen, 1, 1, 100)));
    EXPECT_EQ(conditional_sample(nets.ig, nets.gen, 3, 64, 1).shape(), (Shape{64, 8, 8}));
    EXPECT_THROW(conditional_sample(nets.ig, nets.gen, 4, 1, 1), ValidationError);
    EXPECT_THROW(conditional_sample(nets.ig, nets.gen, 0, 0, 1), ValidationError);
}
