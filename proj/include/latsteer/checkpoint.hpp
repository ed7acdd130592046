#pragma once

// Checkpoint files: a JSON envelope
//
//   {"format_version": 1,
//    "model_kind": "generator" | "classifier" | "discriminator" | "input_generator",
//    "arch": {...},
//    "params": [{"name": ..., "shape": [...], "data_b64": ...}, ...],
//    "meta": {"seed": ..., "epochs_trained": ..., "created_by": ..., "config_hash": ...}}
//
// where data_b64 is the base64 of the tensor's little-endian f64 payload, so
// parameters survive a round trip bit for bit.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "latsteer/nets.hpp"
#include "latsteer/params.hpp"

namespace latsteer {

enum class ModelKind { generator, classifier, discriminator, input_generator };

std::string_view model_kind_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint64_t epochs_trained = 0;
    std::string created_by;
    std::string config_hash;
};

struct Checkpoint {
    static constexpr std::uint32_t current_version = 1;

    std::uint32_t format_version = current_version;
    ModelKind kind = ModelKind::generator;
    nlohmann::json arch;
    Params params;
    CheckpointMeta meta;
};

std::string base64_encode(std::string_view bytes);
// Throws FormatError on characters outside the standard alphabet or bad padding.
std::string base64_decode(std::string_view text);

// Tensor names and shapes implied by an arch description; FormatError if
// the arch is malformed.
std::vector<std::pair<std::string, Shape>> expected_param_shapes(ModelKind kind, const nlohmann::json& arch);

std::string encode_checkpoint(const Checkpoint& ckpt);
// Errors: FormatError (malformed JSON/base64, truncated payload),
// VersionMismatchError, ShapeMismatchError (shape field vs arch).
Checkpoint decode_checkpoint(std::string_view text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint make_checkpoint(const GeneratorNet& net, CheckpointMeta meta);
Checkpoint make_checkpoint(const ClassifierNet& net, CheckpointMeta meta);
Checkpoint make_checkpoint(const DiscriminatorNet& net, CheckpointMeta meta);
Checkpoint make_checkpoint(const InputGeneratorNet& net, CheckpointMeta meta);

// Each throws ModelKindError when the checkpoint holds another kind of model.
GeneratorNet generator_from(const Checkpoint& ckpt);
ClassifierNet classifier_from(const Checkpoint& ckpt);
DiscriminatorNet discriminator_from(const Checkpoint& ckpt);
InputGeneratorNet input_generator_from(const Checkpoint& ckpt);

}  // namespace latsteer
