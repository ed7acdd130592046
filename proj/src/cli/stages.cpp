#include <chrono>
#include <iostream>

#include "latsteer/checkpoint.hpp"
#include "latsteer/cli.hpp"
#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"
#include "latsteer/io.hpp"

namespace latsteer {
namespace {

namespace fs = std::filesystem;

// Bookkeeping for one stage: input/output hashes and the manifest.
class StageRun {
public:
    StageRun(const Config& cfg, std::string command, std::uint64_t seed)
        : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
        manifest_.config_hash = config_hash(cfg);
        manifest_.seed = seed;
        manifest_.config = to_json(cfg);
    }

    // Path of a required input; MissingArtifactError names the stage that
    // produces it.
    fs::path input(const char* name, const char* producer) {
        const fs::path p = cfg_.workdir / name;
        if (!fs::exists(p)) {
            throw MissingArtifactError("missing " + p.string() + "; run `latsteer " + producer + "` first");
        }
        manifest_.inputs.push_back({name, sha256_hex(read_file(p))});
        return p;
    }

    void output(const char* name, std::string_view bytes) {
        write_file(cfg_.workdir / name, bytes);
        manifest_.outputs.push_back({name, sha256_hex(bytes)});
    }

    CheckpointMeta meta(std::uint64_t seed, std::size_t epochs) const {
        return {seed, epochs, std::string("latsteer ") + kVersion + " " + manifest_.command, manifest_.config_hash};
    }

    void finish() {
        manifest_.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_file(cfg_.workdir / (manifest_.command + ".manifest.json"), to_json(manifest_).dump(2) + "\n");
    }

private:
    const Config& cfg_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point start_;
};

DatasetSplits load_splits(StageRun& run, const Config& cfg) {
    const Dataset ds = load_dataset(run.input(artifacts::dataset, "gen-data"));
    SplitSpec spec = cfg.data.split;
    spec.seed = cfg.data.seed;
    return split(ds, spec);
}

Checkpoint load_kind(StageRun& run, const char* name, const char* producer) {
    return load_checkpoint(run.input(name, producer));
}

// Per-class sampling seeds: even slots feed the grid, odd slots the evaluation.
std::uint64_t class_seed(std::uint64_t base, std::size_t k, bool for_eval) {
    Rng r(base);
    std::uint64_t s = 0;
    for (std::size_t i = 0; i <= 2 * k + (for_eval ? 1 : 0); ++i) s = r.next_u64();
    return s;
}

std::string fd_line(const char* what, const FDResult& r) {
    return std::string(what) + ": " + format_double(r.distance) + " (d=" + std::to_string(r.feature_dim) +
           ", n_real=" + std::to_string(r.n_real) + ", n_gen=" + std::to_string(r.n_gen) + ")\n";
}

nlohmann::json fd_json(const FDResult& r) {
    return {{"distance", r.distance}, {"feature_dim", r.feature_dim}, {"n_real", r.n_real}, {"n_gen", r.n_gen}};
}

std::string last_line(const std::string& csv) {
    std::size_t end = csv.find_last_not_of('\n');
    if (end == std::string::npos) return "";
    std::size_t start = csv.rfind('\n', end);
    return csv.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
    auto records = [](const std::vector<ArtifactRecord>& rs) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& r : rs) a.push_back({{"path", r.path}, {"sha256", r.sha256}});
        return a;
    };
    return {{"command", m.command},           {"version", m.version}, {"config_hash", m.config_hash},
            {"seed", m.seed},                 {"inputs", records(m.inputs)}, {"outputs", records(m.outputs)},
            {"wall_time_s", m.wall_time_s},  {"config", m.config}};
}

void run_gen_data(const Config& cfg) {
    StageRun run(cfg, "gen-data", cfg.data.seed);
    const Dataset ds = make_blocks(cfg.data.n_per_class, cfg.data.num_classes, cfg.data.noise_sd, cfg.data.seed);
    run.output(artifacts::dataset, encode_dataset(ds));
    run.finish();
    std::clog << "gen-data: " << ds.size() << " images, K=" << ds.num_classes << "\n";
}

void run_train_gan(const Config& cfg) {
    StageRun run(cfg, "train-gan", cfg.gan.seed);
    const DatasetSplits sp = load_splits(run, cfg);
    const GanResult r = train_gan(sp.train, cfg.gan);
    run.output(artifacts::generator, encode_checkpoint(make_checkpoint(r.generator, run.meta(cfg.gan.seed, cfg.gan.epochs))));
    run.output(artifacts::discriminator,
               encode_checkpoint(make_checkpoint(r.discriminator, run.meta(cfg.gan.seed, cfg.gan.epochs))));
    const nlohmann::json summary = {{"fd_pooled_pixels_initial", r.fd_initial}, {"fd_pooled_pixels_final", r.fd_final}};
    run.output(artifacts::gan_history, to_csv(r.history));
    run.output(artifacts::gan_summary, summary.dump(2) + "\n");
    run.finish();
    std::clog << "train-gan: " << cfg.gan.epochs << " epochs, pooled-pixel FD " << format_double(r.fd_initial)
              << " -> " << format_double(r.fd_final) << "\n";
}

void run_train_classifier(const Config& cfg) {
    StageRun run(cfg, "train-classifier", cfg.classifier.seed);
    const DatasetSplits sp = load_splits(run, cfg);
    const ClassifierResult r = train_classifier(sp.train, sp.val, cfg.classifier);
    // Independently seeded twin, used only as a diagnostic in eval.
    TrainConfig oracle_cfg = cfg.classifier;
    oracle_cfg.seed = cfg.classifier.seed + 1;
    const ClassifierResult oracle = train_classifier(sp.train, sp.val, oracle_cfg);
    run.output(artifacts::classifier,
               encode_checkpoint(make_checkpoint(r.classifier, run.meta(cfg.classifier.seed, cfg.classifier.epochs))));
    run.output(artifacts::oracle_classifier,
               encode_checkpoint(make_checkpoint(oracle.classifier, run.meta(oracle_cfg.seed, oracle_cfg.epochs))));
    run.output(artifacts::classifier_history, to_csv(r.history));
    run.finish();
    std::clog << "train-classifier: val_acc " << format_double(r.history.back().val_acc) << "\n";
}

void run_train_ig(const Config& cfg) {
    StageRun run(cfg, "train-ig", cfg.steer.seed);
    const GeneratorNet gen = generator_from(load_kind(run, artifacts::generator, "train-gan"));
    const ClassifierNet clf = classifier_from(load_kind(run, artifacts::classifier, "train-classifier"));
    const ConditioningResult r = train_input_generator(cfg.steer, gen, clf);
    run.output(artifacts::input_generator,
               encode_checkpoint(make_checkpoint(r.ig, run.meta(cfg.steer.seed, r.history.size()))));
    run.output(artifacts::ig_history, to_csv(r.history));
    run.finish();
    std::clog << "train-ig: " << r.history.size() << " epochs, accuracy " << format_double(r.history.back().accuracy)
              << (r.reached_target ? " (target reached)" : " (target not reached)") << "\n";
}

void run_sample(const Config& cfg) {
    StageRun run(cfg, "sample", cfg.eval.seed);
    const GeneratorNet gen = generator_from(load_kind(run, artifacts::generator, "train-gan"));
    const InputGeneratorNet ig = input_generator_from(load_kind(run, artifacts::input_generator, "train-ig"));
    const std::size_t n = cfg.eval.grid_samples_per_class, k = ig.num_classes;
    Tensor grid({k * n, 8, 8});
    for (std::size_t c = 0; c < k; ++c) {
        const Tensor imgs = conditional_sample(ig, gen, c, n, class_seed(cfg.eval.seed, c, false));
        std::copy(imgs.data().begin(), imgs.data().end(), grid.raw() + c * n * 64);
    }
    run.output(artifacts::grid, encode_grid_ppm(grid, n));
    run.finish();
    std::clog << "sample: " << k << " rows of " << n << " images\n";
}

void run_eval(const Config& cfg) {
    StageRun run(cfg, "eval", cfg.eval.seed);
    const DatasetSplits sp = load_splits(run, cfg);
    const GeneratorNet gen = generator_from(load_kind(run, artifacts::generator, "train-gan"));
    const ClassifierNet clf = classifier_from(load_kind(run, artifacts::classifier, "train-classifier"));
    const ClassifierNet oracle = classifier_from(load_kind(run, artifacts::oracle_classifier, "train-classifier"));
    const InputGeneratorNet ig = input_generator_from(load_kind(run, artifacts::input_generator, "train-ig"));
    if (clf.num_classes != ig.num_classes) throw ValidationError("classifier and input generator disagree on K");

    const std::size_t n = cfg.eval.n_samples_per_class, k = ig.num_classes;
    Tensor samples({k * n, 8, 8});
    std::vector<std::size_t> truth;
    for (std::size_t c = 0; c < k; ++c) {
        const Tensor imgs = conditional_sample(ig, gen, c, n, class_seed(cfg.eval.seed, c, true));
        std::copy(imgs.data().begin(), imgs.data().end(), samples.raw() + c * n * 64);
        truth.insert(truth.end(), n, c);
    }
    const ClassReport same = classification_report(truth, classify(clf, samples), k);
    const ClassReport other = classification_report(truth, classify(oracle, samples), k);
    const FDResult fd_feat = frechet_distance(features(clf, sp.test.images), features(clf, samples));
    const FDResult fd_pix = frechet_distance(pooled_pixels(sp.test.images), pooled_pixels(samples));
    const LatentDiagnostics diag = latent_diagnostics(ig);

    nlohmann::json j = {{"samples_per_class", n},
                        {"frozen_classifier_accuracy", same.accuracy},
                        {"frozen_classifier", to_json(same)},
                        {"oracle_classifier_accuracy", other.accuracy},
                        {"oracle_classifier", to_json(other)},
                        {"fd_classifier_features", fd_json(fd_feat)},
                        {"fd_pooled_pixels", fd_json(fd_pix)},
                        {"latent", to_json(diag)}};

    std::string text = "Conditional samples: " + std::to_string(n) + " per class\n\n";
    text += "Frozen classifier\n" + render_table(same) + "\n";
    text += "Oracle classifier (independent seed, diagnostic)\n" + render_table(other) + "\n";
    text += fd_line("Frechet distance, classifier features (test split vs samples)", fd_feat);
    text += fd_line("Frechet distance, pooled pixels (test split vs samples)", fd_pix);
    text += "\nLatent diagnostics\n";
    for (std::size_t c = 0; c < k; ++c) {
        text += "  class " + std::to_string(c) + ": mean sigma " + format_double(diag.mean_sigma[c]) + "\n";
    }
    text += "  min pairwise |mu_a - mu_b|: " + format_double(j["latent"]["min_pairwise_mu_distance"].get<double>()) + "\n";

    run.output(artifacts::eval_json, j.dump(2) + "\n");
    run.output(artifacts::eval_text, text);
    run.finish();
    std::clog << "eval: frozen-classifier accuracy " << format_double(same.accuracy) << "\n";
}

void run_report(const Config& cfg, std::ostream& out) {
    auto need = [&cfg](const char* name, const char* producer) {
        const fs::path p = cfg.workdir / name;
        if (!fs::exists(p)) {
            throw MissingArtifactError("missing " + p.string() + "; run `latsteer " + producer + "` first");
        }
        return read_file(p);
    };
    const std::string eval_text = need(artifacts::eval_text, "eval");
    auto parse = [](const std::string& text, const char* name) {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(std::string(name) + " is not valid JSON: " + e.what());
        }
    };
    const auto eval = parse(need(artifacts::eval_json, "eval"), artifacts::eval_json);
    const auto gan = parse(need(artifacts::gan_summary, "train-gan"), artifacts::gan_summary);

    out << "latsteer report: " << cfg.workdir.string() << "\n\n";
    out << "GAN history (last epoch,loss_d,loss_g): " << last_line(need(artifacts::gan_history, "train-gan")) << "\n";
    try {
        out << "GAN pooled-pixel FD initial -> final: "
            << format_double(gan.at("fd_pooled_pixels_initial").get<double>()) << " -> "
            << format_double(gan.at("fd_pooled_pixels_final").get<double>()) << "\n";
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string(artifacts::gan_summary) + ": " + e.what());
    }
    out << "Classifier history (last epoch,loss,train_acc,val_acc): "
        << last_line(need(artifacts::classifier_history, "train-classifier")) << "\n";
    out << "Input generator history (last epoch,loss,frozen_clf_accuracy,mean_sigma...): "
        << last_line(need(artifacts::ig_history, "train-ig")) << "\n\n";
    try {
        out << "frozen_classifier_accuracy: " << format_double(eval.at("frozen_classifier_accuracy").get<double>())
            << "\n";
        out << "oracle_classifier_accuracy: " << format_double(eval.at("oracle_classifier_accuracy").get<double>())
            << "\n\n";
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string(artifacts::eval_json) + ": " + e.what());
    }
    out << eval_text;
}

}  // namespace latsteer
