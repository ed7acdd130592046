#include "latsteer/checkpoint.hpp"

#include <array>

#include "latsteer/error.hpp"
#include "latsteer/io.hpp"

namespace latsteer {
namespace {

using nlohmann::json;

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json mlp_arch(const MlpSpec& spec) {
    json a;
    a["layer_widths"] = spec.layer_widths;
    a["hidden_activation"] = std::string(activation_name(spec.hidden_activation));
    a["output_activation"] =
        spec.output_activation ? json(std::string(activation_name(*spec.output_activation))) : json(nullptr);
    return a;
}

MlpSpec mlp_from_arch(const json& a) {
    MlpSpec spec;
    spec.layer_widths = a.at("layer_widths").get<std::vector<std::size_t>>();
    spec.hidden_activation = parse_activation(a.at("hidden_activation").get<std::string>());
    const json& out = a.at("output_activation");
    if (!out.is_null()) spec.output_activation = parse_activation(out.get<std::string>());
    spec.validate();
    return spec;
}

json input_generator_arch(std::size_t num_classes, double sigma_min) {
    json a;
    a["num_classes"] = num_classes;
    a["trunk_widths"] = InputGeneratorNet::trunk_spec(num_classes).layer_widths;
    a["trunk_activation"] = std::string(activation_name(Activation::tanh));
    a["latent_dim"] = InputGeneratorNet::latent_dim;
    a["sigma_min"] = sigma_min;
    return a;
}

Checkpoint with_params(ModelKind kind, json arch, const Params& params, CheckpointMeta meta) {
    Checkpoint c;
    c.kind = kind;
    c.arch = std::move(arch);
    c.params = params;
    c.meta = std::move(meta);
    return c;
}

void require_kind(const Checkpoint& c, ModelKind want) {
    if (c.kind != want) {
        throw ModelKindError("checkpoint holds a " + std::string(model_kind_name(c.kind)) + " model, expected " +
                             std::string(model_kind_name(want)));
    }
}

void require_arch(const Checkpoint& c, const MlpSpec& want) {
    MlpSpec got;
    try {
        got = mlp_from_arch(c.arch);
    } catch (const std::exception& e) {
        throw FormatError(std::string("malformed arch: ") + e.what());
    }
    if (!(got == want)) {
        throw FormatError("checkpoint arch " + c.arch.dump() + " does not match the " +
                          std::string(model_kind_name(c.kind)) + " architecture " + mlp_arch(want).dump());
    }
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::generator: return "generator";
        case ModelKind::classifier: return "classifier";
        case ModelKind::discriminator: return "discriminator";
        case ModelKind::input_generator: return "input_generator";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (ModelKind k : {ModelKind::generator, ModelKind::classifier, ModelKind::discriminator,
                        ModelKind::input_generator}) {
        if (model_kind_name(k) == name) return k;
    }
    throw FormatError("unknown model_kind '" + std::string(name) + "'");
}

std::string base64_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        const std::uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8) | static_cast<unsigned char>(bytes[i + 2]);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest) {
        std::uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
        if (rest == 2) v |= static_cast<unsigned char>(bytes[i + 1]) << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::string base64_decode(std::string_view text) {
    static const std::array<int, 256> table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
        return t;
    }();
    if (text.size() % 4 != 0) throw FormatError("base64 length " + std::to_string(text.size()) + " is not a multiple of 4");
    std::string out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int j = 0; j < 4; ++j) {
            const char ch = text[i + j];
            if (ch == '=' && i + 4 == text.size() && j >= 2) {
                vals[j] = 0;
                ++pad;
                continue;
            }
            if (pad) throw FormatError("base64 padding in the middle of a quantum", i + j);
            vals[j] = table[static_cast<unsigned char>(ch)];
            if (vals[j] < 0) throw FormatError("invalid base64 character", i + j);
        }
        const std::uint32_t v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out += static_cast<char>((v >> 16) & 0xff);
        if (pad < 2) out += static_cast<char>((v >> 8) & 0xff);
        if (pad < 1) out += static_cast<char>(v & 0xff);
    }
    return out;
}

std::vector<std::pair<std::string, Shape>> expected_param_shapes(ModelKind kind, const json& arch) {
    try {
        if (kind == ModelKind::input_generator) {
            const auto k = arch.at("num_classes").get<std::size_t>();
            if (k < 2) throw FormatError("input generator arch needs num_classes >= 2");
            auto shapes = mlp_param_shapes(InputGeneratorNet::trunk_spec(k), "trunk.");
            for (const char* head : {"mu_head.", "sigma_head."}) {
                for (auto& s : mlp_param_shapes(InputGeneratorNet::head_spec(), head)) shapes.push_back(std::move(s));
            }
            return shapes;
        }
        return mlp_param_shapes(mlp_from_arch(arch));
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("malformed arch: ") + e.what());
    }
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
    json params = json::array();
    for (const auto& e : ckpt.params) {
        std::string raw;
        raw.reserve(e.value.size() * 8);
        for (double v : e.value.data()) put_f64(raw, v);
        params.push_back({{"name", e.name}, {"shape", e.value.shape()}, {"data_b64", base64_encode(raw)}});
    }
    json doc;
    doc["format_version"] = ckpt.format_version;
    doc["model_kind"] = std::string(model_kind_name(ckpt.kind));
    doc["arch"] = ckpt.arch;
    doc["params"] = std::move(params);
    doc["meta"] = {{"seed", ckpt.meta.seed},
                   {"epochs_trained", ckpt.meta.epochs_trained},
                   {"created_by", ckpt.meta.created_by},
                   {"config_hash", ckpt.meta.config_hash}};
    return doc.dump(2) + "\n";
}

Checkpoint decode_checkpoint(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what(), e.byte);
    }
    if (!doc.is_object()) throw FormatError("checkpoint root must be a JSON object");

    Checkpoint c;
    try {
        c.format_version = doc.at("format_version").get<std::uint32_t>();
        if (c.format_version != Checkpoint::current_version) {
            throw VersionMismatchError("checkpoint format_version " + std::to_string(c.format_version) +
                                       " is not supported (expected " +
                                       std::to_string(Checkpoint::current_version) + ")");
        }
        c.kind = parse_model_kind(doc.at("model_kind").get<std::string>());
        c.arch = doc.at("arch");
        const json& meta = doc.at("meta");
        c.meta.seed = meta.at("seed").get<std::uint64_t>();
        c.meta.epochs_trained = meta.at("epochs_trained").get<std::uint64_t>();
        c.meta.created_by = meta.value("created_by", "");
        c.meta.config_hash = meta.value("config_hash", "");

        const auto expected = expected_param_shapes(c.kind, c.arch);
        const json& params = doc.at("params");
        if (!params.is_array() || params.size() != expected.size()) {
            throw FormatError("checkpoint lists " + std::to_string(params.is_array() ? params.size() : 0) +
                              " tensors, arch implies " + std::to_string(expected.size()));
        }
        for (std::size_t i = 0; i < expected.size(); ++i) {
            const json& p = params[i];
            const auto name = p.at("name").get<std::string>();
            const auto& [want_name, want_shape] = expected[i];
            if (name != want_name) {
                throw FormatError("tensor " + std::to_string(i) + " is named '" + name + "', expected '" + want_name + "'");
            }
            const auto shape = p.at("shape").get<Shape>();
            if (shape != want_shape) {
                throw ShapeMismatchError(name, "stored shape " + to_string(shape) + " but arch implies " +
                                                   to_string(want_shape));
            }
            const std::string raw = base64_decode(p.at("data_b64").get<std::string>());
            const std::size_t n = shape_size(shape);
            if (raw.size() != n * 8) {
                throw FormatError("tensor '" + name + "' payload has " + std::to_string(raw.size()) +
                                  " bytes, expected " + std::to_string(n * 8));
            }
            std::vector<double> data(n);
            for (std::size_t j = 0; j < n; ++j) data[j] = get_f64(raw, 8 * j);
            Tensor t(shape, std::move(data));
            if (!t.all_finite()) throw FormatError("tensor '" + name + "' contains non-finite values");
            c.params.add(name, std::move(t));
        }
    } catch (const FormatError&) {
        throw;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint field: ") + e.what());
    }
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

Checkpoint make_checkpoint(const GeneratorNet& net, CheckpointMeta meta) {
    return with_params(ModelKind::generator, mlp_arch(GeneratorNet::spec()), net.params, std::move(meta));
}

Checkpoint make_checkpoint(const ClassifierNet& net, CheckpointMeta meta) {
    return with_params(ModelKind::classifier, mlp_arch(ClassifierNet::spec(net.num_classes)), net.params,
                       std::move(meta));
}

Checkpoint make_checkpoint(const DiscriminatorNet& net, CheckpointMeta meta) {
    return with_params(ModelKind::discriminator, mlp_arch(DiscriminatorNet::spec()), net.params, std::move(meta));
}

Checkpoint make_checkpoint(const InputGeneratorNet& net, CheckpointMeta meta) {
    return with_params(ModelKind::input_generator, input_generator_arch(net.num_classes, net.sigma_min), net.params,
                       std::move(meta));
}

GeneratorNet generator_from(const Checkpoint& ckpt) {
    require_kind(ckpt, ModelKind::generator);
    require_arch(ckpt, GeneratorNet::spec());
    return {ckpt.params};
}

ClassifierNet classifier_from(const Checkpoint& ckpt) {
    require_kind(ckpt, ModelKind::classifier);
    const auto& widths = ckpt.arch.at("layer_widths");
    const std::size_t k = widths.back().get<std::size_t>();
    require_arch(ckpt, ClassifierNet::spec(k));
    return {k, ckpt.params};
}

DiscriminatorNet discriminator_from(const Checkpoint& ckpt) {
    require_kind(ckpt, ModelKind::discriminator);
    require_arch(ckpt, DiscriminatorNet::spec());
    return {ckpt.params};
}

InputGeneratorNet input_generator_from(const Checkpoint& ckpt) {
    require_kind(ckpt, ModelKind::input_generator);
    InputGeneratorNet net;
    try {
        net.num_classes = ckpt.arch.at("num_classes").get<std::size_t>();
        net.sigma_min = ckpt.arch.at("sigma_min").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed input generator arch: ") + e.what());
    }
    if (!(net.sigma_min > 0.0)) throw FormatError("input generator sigma_min must be > 0");
    if (ckpt.arch != input_generator_arch(net.num_classes, net.sigma_min)) {
        throw FormatError("input generator arch " + ckpt.arch.dump() + " is not supported");
    }
    net.params = ckpt.params;
    return net;
}

}  // namespace latsteer
