#pragma once

// Command-line driver: one subcommand per pipeline stage, configured by a
// single JSON file plus flag overrides. Stages exchange data only through
// files in the work directory; each writes <command>.manifest.json.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latsteer/pretrain.hpp"
#include "latsteer/steer.hpp"
#include "latsteer/synthdata.hpp"

namespace latsteer {

inline constexpr const char* kVersion = "0.1.0";

struct DataConfig {
    std::size_t n_per_class = 400;
    std::size_t num_classes = 4;
    double noise_sd = 0.05;
    std::uint64_t seed = 42;
    SplitSpec split;  // split.seed follows seed
};

struct EvalConfig {
    std::size_t n_samples_per_class = 1000;
    std::size_t grid_samples_per_class = 16;
    std::uint64_t seed = 42;
};

struct Config {
    DataConfig data;
    TrainConfig gan;
    TrainConfig classifier;
    ConditioningConfig steer;
    EvalConfig eval;
    std::filesystem::path workdir = "run";

    static Config defaults();
    // Throws ConfigError on the first invalid field, naming it.
    void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);
nlohmann::json to_json(const Config& cfg);
// SHA-256 of the canonical JSON of everything except paths, so runs that
// differ only in the work directory share a hash.
std::string config_hash(const Config& cfg);

struct Overrides {
    std::optional<std::uint64_t> seed;     // every stage seed
    std::optional<std::size_t> epochs;     // the training stage(s) being run
    std::optional<double> lambda;          // steer.lambda
    std::optional<std::filesystem::path> out;  // work directory
};

struct ArtifactRecord {
    std::string path;  // relative to the work directory
    std::string sha256;
};

struct RunManifest {
    std::string command;
    std::string version = kVersion;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<ArtifactRecord> inputs;
    std::vector<ArtifactRecord> outputs;
    double wall_time_s = 0.0;
    nlohmann::json config;  // resolved config after flag overrides
};

nlohmann::json to_json(const RunManifest& m);

// Artifact file names inside the work directory.
namespace artifacts {
inline constexpr const char* dataset = "dataset.lsds";
inline constexpr const char* generator = "generator.ckpt.json";
inline constexpr const char* discriminator = "discriminator.ckpt.json";
inline constexpr const char* gan_history = "gan_history.csv";
inline constexpr const char* gan_summary = "gan_summary.json";  // pooled-pixel FD before and after
inline constexpr const char* classifier = "classifier.ckpt.json";
inline constexpr const char* oracle_classifier = "oracle_classifier.ckpt.json";
inline constexpr const char* classifier_history = "classifier_history.csv";
inline constexpr const char* input_generator = "input_generator.ckpt.json";
inline constexpr const char* ig_history = "ig_history.csv";
inline constexpr const char* grid = "samples_grid.ppm";
inline constexpr const char* eval_json = "eval_report.json";
inline constexpr const char* eval_text = "eval_report.txt";
}  // namespace artifacts

// Runs one stage against an already validated config.
void run_gen_data(const Config& cfg);
void run_train_gan(const Config& cfg);
void run_train_classifier(const Config& cfg);
void run_train_ig(const Config& cfg);
void run_sample(const Config& cfg);
void run_eval(const Config& cfg);
// Read-only: prints the evaluation summary.
void run_report(const Config& cfg, std::ostream& out);

// Exit codes: 0 success, 1 usage/validation/format error, 2 numerical or
// I/O failure.
int parse_and_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int parse_and_run(int argc, const char* const* argv);

}  // namespace latsteer
