#include <CLI11.hpp>

#include <iostream>

#include "latsteer/cli.hpp"
#include "latsteer/error.hpp"

namespace latsteer {
namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<double> lambda;
    std::optional<std::string> out;
};

void apply(Config& cfg, const std::string& command, const Flags& f) {
    if (f.seed) {
        cfg.data.seed = cfg.gan.seed = cfg.classifier.seed = cfg.steer.seed = cfg.eval.seed = *f.seed;
        cfg.data.split.seed = *f.seed;
    }
    if (f.epochs) {
        const bool all = command == "all";
        if (all || command == "train-gan") cfg.gan.epochs = *f.epochs;
        if (all || command == "train-classifier") cfg.classifier.epochs = *f.epochs;
        if (all || command == "train-ig") cfg.steer.epochs = *f.epochs;
    }
    if (f.lambda) cfg.steer.lambda = *f.lambda;
    if (f.out) cfg.workdir = *f.out;
}

void dispatch(const std::string& command, const Config& cfg, std::ostream& out) {
    if (command == "gen-data") return run_gen_data(cfg);
    if (command == "train-gan") return run_train_gan(cfg);
    if (command == "train-classifier") return run_train_classifier(cfg);
    if (command == "train-ig") return run_train_ig(cfg);
    if (command == "sample") return run_sample(cfg);
    if (command == "eval") return run_eval(cfg);
    if (command == "report") return run_report(cfg, out);
    run_gen_data(cfg);
    run_train_gan(cfg);
    run_train_classifier(cfg);
    run_train_ig(cfg);
    run_sample(cfg);
    run_eval(cfg);
    run_report(cfg, out);
}

}  // namespace

int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Condition a frozen generator through a frozen classifier", "latsteer"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    const std::pair<const char*, const char*> commands[] = {
        {"gen-data", "Generate the synthetic blocks dataset"},
        {"train-gan", "Pretrain generator and discriminator"},
        {"train-classifier", "Pretrain the classifier on 2x upsampled images"},
        {"train-ig", "Train the input generator through the frozen nets"},
        {"sample", "Write a grid of conditional samples per class"},
        {"eval", "Classification report, Frechet distances, latent diagnostics"},
        {"report", "Print the evaluation summary (read-only)"},
        {"all", "Run every stage in order"},
    };
    Flags flags;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "Seed for every stage");
        sub->add_option("--epochs", flags.epochs, "Epoch count of the training stage(s) run")
            ->check(CLI::PositiveNumber);
        sub->add_option("--lambda", flags.lambda, "Variance regularizer weight (steer)");
        sub->add_option("--out", flags.out, "Work directory for artifacts");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        Config cfg = flags.config.empty() ? Config::defaults() : load_config(flags.config);
        apply(cfg, command, flags);
        cfg.validate();
        dispatch(command, cfg, out);
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

int parse_and_run(int argc, const char* const* argv) { return parse_and_run(argc, argv, std::cout, std::cerr); }

}  // namespace latsteer
