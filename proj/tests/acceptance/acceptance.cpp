// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "latsteer/checkpoint.hpp"
#include "latsteer/cli.hpp"
#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"
#include "latsteer/gradcheck.hpp"
#include "latsteer/io.hpp"
#include "latsteer/pretrain.hpp"
#include "latsteer/steer.hpp"

using namespace latsteer;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Tensor uniform(Rng& rng, Shape shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

Tensor away_from_zero(Rng& rng, Shape shape, double gap) {
    Tensor t(std::move(shape));
    for (double& v : t.data()) {
        do v = rng.uniform(-2, 2);
        while (std::abs(v) < gap);
    }
    return t;
}

Tensor random_one_hot_rows(Rng& rng, std::size_t rows, std::size_t k) {
    Tensor t({rows, k});
    for (std::size_t r = 0; r < rows; ++r) t.at(r, rng.below(k)) = 1.0;
    return t;
}

// Shared pretrained nets for criteria 3, 4 and 6 (default config, seed 42).
struct Pretrained {
    Config cfg;
    GeneratorNet gen;
    ClassifierNet clf;
    double seconds = 0.0;
};

const Pretrained& pretrained() {
    static const Pretrained p = [] {
        const auto t0 = Clock::now();
        Pretrained out;
        out.cfg = Config::defaults();
        const Dataset ds = make_blocks(out.cfg.data.n_per_class, out.cfg.data.num_classes, out.cfg.data.noise_sd,
                                       out.cfg.data.seed);
        SplitSpec spec = out.cfg.data.split;
        spec.seed = out.cfg.data.seed;
        const DatasetSplits sp = split(ds, spec);
        out.gen = train_gan(sp.train, out.cfg.gan).generator;
        out.clf = train_classifier(sp.train, sp.val, out.cfg.classifier).classifier;
        out.seconds = seconds_since(t0);
        return out;
    }();
    return p;
}

// Signs of every classifier hidden pre-activation for the pipeline input.
// Leaky relu is the only non-smooth op on the path, so equal patterns at
// theta and theta +- h mean central differences straddle no kink.
std::vector<bool> kink_signs(const InputGeneratorNet& ig, const GeneratorNet& gen, const ClassifierNet& clf,
                             const Tensor& x, const Tensor& eps) {
    const auto [mu, sigma] = ig.forward(x);
    const Tensor img = gen.forward(sample_latent(mu, sigma, eps));
    const std::size_t b = x.shape()[0];
    Graph g;
    Var v = reshape(nearest_upsample(g.constant(img), 2), {b, ClassifierNet::input_side * ClassifierNet::input_side});
    const MlpSpec spec = ClassifierNet::spec(clf.num_classes);
    std::vector<bool> signs;
    for (std::size_t l = 0; l + 1 < spec.layers(); ++l) {
        v = add_bias(matmul(v, g.constant(clf.params[2 * l].value)), g.constant(clf.params[2 * l + 1].value));
        for (double a : v.value().data()) signs.push_back(a > 0.0);
        v = activation(spec.hidden_activation, v);
    }
    return signs;
}

bool smooth_on_stencil(InputGeneratorNet& ig, const GeneratorNet& gen, const ClassifierNet& clf, const Tensor& x,
                       const Tensor& eps, double h) {
    const std::vector<bool> base = kink_signs(ig, gen, clf, x, eps);
    for (auto& e : ig.params) {
        for (std::size_t i = 0; i < e.value.size(); ++i) {
            const double saved = e.value[i];
            bool same = true;
            for (double step : {h, -h}) {
                e.value[i] = saved + step;
                same = same && kink_signs(ig, gen, clf, x, eps) == base;
            }
            e.value[i] = saved;
            if (!same) return false;
        }
    }
    return true;
}

// ---- 1 ----
Outcome gradient_integrity() {
    const auto t0 = Clock::now();
    const double h = 1e-4, tol = 1e-4;
    Rng rng(2024);
    double worst = 0.0;
    std::string worst_case;
    std::size_t checks = 0;

    auto check = [&](const std::string& name, Params theta, const std::function<Var(Graph&, std::span<const Var>)>& op,
                     Shape out_shape) {
        // A fixed random weighting turns any output into a generic scalar.
        const Tensor w = uniform(rng, out_shape, -1, 1);
        auto f = [&](Graph& g, std::span<const Var> p) { return sum(mul(op(g, p), g.constant(w))); };
        const GradCheckReport r = grad_check(f, theta, h, tol);
        ++checks;
        if (r.max_rel_err > worst || !r.pass) {
            worst = std::max(worst, r.max_rel_err);
            worst_case = name;
        }
        return r.pass;
    };

    bool ok = true;
    for (int draw = 0; draw < 5; ++draw) {
        auto two = [&](Shape a, Shape b, double gap = 0.0) {
            Params t;
            t.add("a", gap > 0 ? away_from_zero(rng, a, gap) : uniform(rng, a, -2, 2));
            t.add("b", gap > 0 ? away_from_zero(rng, b, gap) : uniform(rng, b, -2, 2));
            return t;
        };
        auto one = [&](Shape a, double lo = -2, double hi = 2) {
            Params t;
            t.add("x", uniform(rng, a, lo, hi));
            return t;
        };
        ok &= check("matmul", two({3, 4}, {4, 2}), [](Graph&, auto p) { return matmul(p[0], p[1]); }, {3, 2});
        ok &= check("matmul vec-mat", two({4}, {4, 3}), [](Graph&, auto p) { return matmul(p[0], p[1]); }, {3});
        ok &= check("matmul mat-vec", two({2, 4}, {4}), [](Graph&, auto p) { return matmul(p[0], p[1]); }, {2});
        ok &= check("add", two({3, 4}, {3, 4}), [](Graph&, auto p) { return add(p[0], p[1]); }, {3, 4});
        ok &= check("sub", two({3, 4}, {3, 4}), [](Graph&, auto p) { return sub(p[0], p[1]); }, {3, 4});
        ok &= check("mul", two({3, 4}, {3, 4}), [](Graph&, auto p) { return mul(p[0], p[1]); }, {3, 4});
        ok &= check("scale", one({5}), [](Graph&, auto p) { return scale(p[0], -1.7); }, {5});
        ok &= check("add_bias", two({3, 4}, {4}), [](Graph&, auto p) { return add_bias(p[0], p[1]); }, {3, 4});
        for (Activation a : {Activation::relu, Activation::leaky_relu, Activation::tanh, Activation::sigmoid,
                             Activation::softplus}) {
            Params t;
            t.add("x", away_from_zero(rng, {3, 4}, 0.01));
            ok &= check(std::string(activation_name(a)), t, [a](Graph&, auto p) { return activation(a, p[0]); },
                        {3, 4});
        }
        ok &= check("log", one({6}, 0.1, 3.0), [](Graph&, auto p) { return log(p[0]); }, {6});
        ok &= check("sum", one({3, 4}), [](Graph&, auto p) { return sum(p[0]); }, {1});
        ok &= check("mean", one({3, 4}), [](Graph&, auto p) { return mean(p[0]); }, {1});
        ok &= check("reshape", one({3, 4}), [](Graph&, auto p) { return reshape(p[0], {2, 6}); }, {2, 6});
        const Tensor target = random_one_hot_rows(rng, 3, 5);
        ok &= check("softmax_cce", one({3, 5}, -3, 3),
                    [target](Graph&, auto p) { return softmax_cce(p[0], target); }, {1});
        ok &= check("nearest_upsample", one({2, 3, 3}), [](Graph&, auto p) { return nearest_upsample(p[0], 2); },
                    {2, 6, 6});
        const Tensor eps = uniform(rng, {2, 8}, -2, 2);
        Params lat;
        lat.add("mu", uniform(rng, {2, 8}, -2, 2));
        lat.add("sigma", uniform(rng, {2, 8}, 0.1, 2));
        ok &= check("sample_latent", lat, [eps](Graph&, auto p) { return sample_latent(p[0], p[1], eps); }, {2, 8});
    }

    // Full composite: one-hot -> (mu, sigma) -> z -> generator -> upsample ->
    // classifier -> conditioning loss, with respect to the input generator.
    std::size_t composite_ok = 0, redrawn = 0;
    const std::size_t draws = 20;
    for (std::size_t d = 0; d < draws; ++d) {
        InputGeneratorNet ig = InputGeneratorNet::init(4, 1e-4, 1000 + d);
        const GeneratorNet gen = GeneratorNet::init(2000 + d);
        const ClassifierNet clf = ClassifierNet::init(4, 3000 + d);
        std::size_t b;
        Tensor x, eps;
        for (;;) {
            b = 1 + rng.below(3);
            x = random_one_hot_rows(rng, b, 4);
            eps = uniform(rng, {b, 8}, -2.5, 2.5);
            if (smooth_on_stencil(ig, gen, clf, x, eps, h)) break;
            ++redrawn;
        }
        const double lambda = d % 2 == 0 ? 0.0 : 0.1;
        auto f = [&](Graph& g, std::span<const Var> p) {
            auto gp = bind_constants(g, gen.params.tensors());
            auto cp = bind_constants(g, clf.params.tensors());
            const PipelineVars v = pipeline_forward(ig, p, gen, gp, clf, cp, x, eps);
            return conditioning_loss(v.logits, x, v.sigma, lambda);
        };
        const GradCheckReport r = grad_check(f, ig.params, h, tol);
        ++checks;
        if (r.pass) ++composite_ok;
        if (r.max_rel_err > worst) {
            worst = r.max_rel_err;
            worst_case = "composite draw " + std::to_string(d) + " " + r.worst_param + "[" +
                         std::to_string(r.worst_index) + "] analytic " + fmt("%.6e", r.analytic) + " numeric " +
                         fmt("%.6e", r.numeric);
        }
    }
    ok &= composite_ok == draws;
    const double secs = seconds_since(t0);
    ok &= secs < 30.0;
    return {ok, std::to_string(checks) + " checks, composite " + std::to_string(composite_ok) + "/" +
                    std::to_string(draws) + " (" + std::to_string(redrawn) + " redrawn for a kink in the stencil), worst rel err " + fmt("%.2e", worst) + " (" + worst_case + "), " +
                    fmt("%.1f s", secs) + " (limit 30 s)"};
}

// ---- 2 ----
Outcome classifier_pretraining() {
    const auto t0 = Clock::now();
    const Dataset ds = make_blocks(400, 4, 0.05, 42);
    const DatasetSplits sp = split(ds, {0.8, 0.1, 0.1, 42});
    TrainConfig c = Config::defaults().classifier;
    c.epochs = 20;
    const ClassifierResult r = train_classifier(sp.train, sp.val, c);
    std::size_t first = 0;
    for (const auto& e : r.history)
        if (e.val_acc >= 0.99) {
            first = e.epoch;
            break;
        }
    const double secs = seconds_since(t0);
    return {first != 0 && secs < 120.0,
            "val_acc >= 0.99 first at epoch " + (first ? std::to_string(first) : std::string("never")) +
                ", final " + fmt("%.4f", r.history.back().val_acc) + ", " + fmt("%.1f s", secs) + " (limit 120 s)"};
}

// ---- 3 and 4 ----
struct SteerRun {
    ConditioningResult result;
    ClassReport report;
    double seconds = 0.0;
};

SteerRun steer_and_score(std::uint64_t seed, double lambda) {
    const Pretrained& p = pretrained();
    const auto t0 = Clock::now();
    ConditioningConfig c = p.cfg.steer;
    c.seed = seed;
    c.lambda = lambda;
    SteerRun s{train_input_generator(c, p.gen, p.clf), {}, 0.0};
    std::vector<std::size_t> truth, pred;
    for (std::size_t k = 0; k < p.clf.num_classes; ++k) {
        const auto labels = classify(p.clf, conditional_sample(s.result.ig, p.gen, k, 1000, seed * 100 + k));
        pred.insert(pred.end(), labels.begin(), labels.end());
        truth.insert(truth.end(), labels.size(), k);
    }
    s.report = classification_report(truth, pred, p.clf.num_classes);
    s.seconds = seconds_since(t0);
    return s;
}

Outcome conditioning_success_and_frozen(Outcome& frozen) {
    const Pretrained& p = pretrained();
    const std::string gen_before = encode_checkpoint(make_checkpoint(p.gen, {}));
    const std::string clf_before = encode_checkpoint(make_checkpoint(p.clf, {}));
    const SteerRun s = steer_and_score(42, 0.0);
    const std::string gen_after = encode_checkpoint(make_checkpoint(p.gen, {}));
    const std::string clf_after = encode_checkpoint(make_checkpoint(p.clf, {}));
    frozen = {gen_before == gen_after && clf_before == clf_after,
              "generator " + std::string(gen_before == gen_after ? "identical" : "CHANGED") + " (" +
                  std::to_string(gen_before.size()) + " bytes), classifier " +
                  (clf_before == clf_after ? "identical" : "CHANGED") + " (" + std::to_string(clf_before.size()) +
                  " bytes)"};

    double min_pr = 1.0;
    for (const auto& m : s.report.per_class) min_pr = std::min({min_pr, m.precision, m.recall});
    const double secs = p.seconds + s.seconds;
    const bool ok = s.report.accuracy >= 0.99 && min_pr >= 0.99 && secs < 180.0;
    return {ok, "accuracy " + fmt("%.4f", s.report.accuracy) + " on 4x1000 samples, min per-class P/R " +
                    fmt("%.4f", min_pr) + ", " + std::to_string(s.result.history.size()) + " epochs, " +
                    fmt("%.1f s", secs) + " incl. pretraining (limit 180 s)"};
}

// ---- 5 ----
Outcome reparameterization_statistics() {
    Rng rng(5);
    const Tensor mu = uniform(rng, {8}, -3, 3);
    const Tensor sigma = uniform(rng, {8}, 0.05, 2.5);
    const std::size_t n = 10000;
    std::vector<double> s1(8, 0.0), s2(8, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor eps({8});
        rng.fill_normal(eps.data());
        const Tensor z = sample_latent(mu, sigma, eps);
        for (std::size_t j = 0; j < 8; ++j) {
            s1[j] += z[j];
            s2[j] += z[j] * z[j];
        }
    }
    bool ok = true;
    double worst_mean = 0.0, worst_sd = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
        const double m = s1[j] / n;
        const double sd = std::sqrt((s2[j] - n * m * m) / (n - 1));
        const double mean_ratio = std::abs(m - mu[j]) / (4 * sigma[j] / std::sqrt(double(n)));
        const double sd_err = std::abs(sd / sigma[j] - 1.0);
        worst_mean = std::max(worst_mean, mean_ratio);
        worst_sd = std::max(worst_sd, sd_err);
        ok &= mean_ratio <= 1.0 && sd_err <= 0.05;
    }
    return {ok, "worst |mean-mu| / (4 sigma/100) = " + fmt("%.3f", worst_mean) + ", worst |std/sigma - 1| = " +
                    fmt("%.4f", worst_sd)};
}

// ---- 6 ----
Outcome variance_regularizer() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {1, 2, 3}) {
        const SteerRun a = steer_and_score(seed, 0.0);
        const SteerRun b = steer_and_score(seed, 0.1);
        const auto& sa = a.result.history.back().mean_sigma;
        const auto& sb = b.result.history.back().mean_sigma;
        bool larger = true;
        double avg_a = 0, avg_b = 0;
        for (std::size_t k = 0; k < sa.size(); ++k) {
            larger &= sb[k] > sa[k];
            avg_a += sa[k] / sa.size();
            avg_b += sb[k] / sb.size();
        }
        const bool pair_ok = a.report.accuracy >= 0.95 && b.report.accuracy >= 0.95 && larger;
        ok &= pair_ok;
        detail += "seed " + std::to_string(seed) + ": acc " + fmt("%.4f", a.report.accuracy) + "/" +
                  fmt("%.4f", b.report.accuracy) + ", mean sigma " + fmt("%.4f", avg_a) + " -> " + fmt("%.4f", avg_b) +
                  (larger ? "" : " (not larger for every class)") + "; ";
    }
    const double secs = seconds_since(t0);
    ok &= secs < 600.0;
    return {ok, detail + fmt("%.1f s", secs) + " (limit 600 s)"};
}

// ---- 7 ----
Outcome frechet_correctness() {
    Rng rng(7);
    auto gaussian = [&rng](std::size_t n, std::size_t d, double mean) {
        Tensor t({n, d});
        for (double& v : t.data()) v = mean + rng.normal();
        return t;
    };
    const Tensor x16 = gaussian(2000, 16, 0.0);
    const double self = frechet_distance(x16, x16).distance;
    const double one_d = frechet_distance(gaussian(100000, 1, 0.0), gaussian(100000, 1, 1.0)).distance;
    const Tensor y16 = gaussian(1500, 16, 0.3);
    const double asym = std::abs(frechet_distance(x16, y16).distance - frechet_distance(y16, x16).distance);
    const bool ok = self < 1e-8 && std::abs(one_d - 1.0) <= 0.05 && asym <= 1e-8;
    return {ok, "FD(X,X) = " + fmt("%.2e", self) + ", 1-D N(0,1) vs N(1,1) = " + fmt("%.4f", one_d) +
                    ", |FD(X,Y) - FD(Y,X)| = " + fmt("%.2e", asym)};
}

// ---- 8 ----
Outcome determinism() {
    const fs::path base = fs::temp_directory_path() / "latsteer_acceptance";
    fs::remove_all(base);
    std::string detail;
    for (const char* run : {"a", "b"}) {
        const std::string out = (base / run).string();
        const char* argv[] = {"latsteer", "all", "--seed", "42", "--out", out.c_str()};
        std::ostringstream sink_out, sink_err;
        const int code = parse_and_run(6, argv, sink_out, sink_err);
        if (code != 0) return {false, std::string("run ") + run + " exited " + std::to_string(code) + ": " + sink_err.str()};
    }
    std::size_t compared = 0, differing = 0;
    for (const auto& e : fs::directory_iterator(base / "a")) {
        const std::string name = e.path().filename().string();
        if (name.find(".manifest.json") != std::string::npos) continue;
        ++compared;
        if (!fs::exists(base / "b" / name) || read_file(e.path()) != read_file(base / "b" / name)) {
            ++differing;
            detail += " differs: " + name;
        }
    }
    const bool ok = differing == 0 && compared >= 13;
    fs::remove_all(base);
    return {ok, std::to_string(compared) + " artifacts compared (dataset, checkpoints, histories, grid, reports), " +
                    std::to_string(differing) + " differ" + detail};
}

// ---- 9 ----
Outcome artifact_formats() {
    std::size_t corruptions = 0, typed = 0, accepted = 0;
    std::string untyped;
    auto probe = [&](const std::function<void()>& decode, bool must_fail) {
        ++corruptions;
        try {
            decode();
            ++accepted;
            if (must_fail) untyped += " accepted-truncation";
        } catch (const ValidationError&) {
            ++typed;
        } catch (const std::exception& e) {
            untyped += std::string(" ") + e.what();
        }
    };

    const Dataset ds = make_blocks(5, 4, 0.05, 9);
    const std::string ds_bytes = encode_dataset(ds);
    const bool ds_round = decode_dataset(ds_bytes).bit_equal(ds);

    Params odd;
    odd.add("layer0.weight", Tensor::matrix({{-0.0, 4.9e-324}, {1e308, -1.0 / 3.0}}));
    GeneratorNet gen = GeneratorNet::init(3);
    gen.params[0].value[0] = -0.0;
    gen.params[0].value[1] = 4.9e-324;
    gen.params[1].value[2] = std::nextafter(1.0, 2.0);
    const std::string ck_bytes = encode_checkpoint(make_checkpoint(gen, {1, 2, "acceptance", "hash"}));
    const Checkpoint back = decode_checkpoint(ck_bytes);
    const bool ck_round = back.params.bit_equal(gen.params) && encode_checkpoint(back) == ck_bytes;

    Rng rng(99);
    for (std::size_t len = 0; len < ds_bytes.size(); len += 1 + len / 8) {
        probe([&] { decode_dataset(std::string_view(ds_bytes).substr(0, len)); }, true);
    }
    for (std::size_t len = 0; len < ck_bytes.size(); len += 1 + len / 8) {
        probe([&] { decode_checkpoint(std::string_view(ck_bytes).substr(0, len)); }, true);
    }
    for (int i = 0; i < 400; ++i) {
        std::string d = ds_bytes;
        d[rng.below(d.size())] = static_cast<char>(rng.below(256));
        probe([&] { decode_dataset(d); }, false);
        std::string c = ck_bytes;
        c[rng.below(c.size())] = static_cast<char>(rng.below(256));
        probe([&] { decode_checkpoint(c); }, false);
    }
    const bool ok = ds_round && ck_round && untyped.empty();
    return {ok, std::string("dataset round trip ") + (ds_round ? "bit-exact" : "MISMATCH") + ", checkpoint round trip " +
                    (ck_round ? "bit-exact" : "MISMATCH") + "; " + std::to_string(corruptions) +
                    " corrupted inputs: " + std::to_string(typed) + " typed errors, " + std::to_string(accepted) +
                    " decoded as valid, " + (untyped.empty() ? "0 untyped" : "untyped:" + untyped)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&failures](int id, const char* title, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
        std::fflush(stdout);
    };

    Outcome frozen{false, "not run"};
    report(1, "gradient integrity", gradient_integrity);
    report(2, "classifier pretraining", classifier_pretraining);
    report(3, "conditioning success", [&] { return conditioning_success_and_frozen(frozen); });
    report(4, "frozen networks", [&] { return frozen; });
    report(5, "reparameterization statistics", reparameterization_statistics);
    report(6, "variance regularizer", variance_regularizer);
    report(7, "Frechet distance", frechet_correctness);
    report(8, "determinism", determinism);
    report(9, "artifact formats", artifact_formats);
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures == 0 ? 0 : 1;
}
