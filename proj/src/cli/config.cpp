#include <set>

#include "latsteer/cli.hpp"
#include "latsteer/error.hpp"
#include "latsteer/io.hpp"

namespace latsteer {
namespace {

using nlohmann::json;

// Reads fields of one JSON object, rejecting keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& dst) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_floating_point_v<T>) {
                if (!v.is_number()) throw ConfigError("");
            } else if constexpr (std::is_integral_v<T>) {
                if (!v.is_number_unsigned()) throw ConfigError("");
            }
            dst = v.get<T>();
        } catch (const std::exception&) {
            throw ConfigError(path_ + "." + key + ": expected " + expected<T>() + ", got " + v.dump());
        }
    }

    template <class T>
    void get(const char* key, std::optional<T>& dst) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) return;
        T v{};
        get(key, v);
        dst = v;
    }

    const json* child(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string path(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) throw ConfigError("unknown config key " + path_ + "." + key);
        }
    }

private:
    template <class T>
    static std::string expected() {
        if constexpr (std::is_floating_point_v<T>) return "a number";
        else if constexpr (std::is_integral_v<T>) return "a non-negative integer";
        else return "a string";
    }

    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

void read_train(Section s, TrainConfig& c, bool gan) {
    s.get("epochs", c.epochs);
    s.get("batch_size", c.batch_size);
    s.get("learning_rate", c.learning_rate);
    s.get("beta1", c.beta1);
    s.get("beta2", c.beta2);
    s.get("eps", c.eps);
    s.get("seed", c.seed);
    if (gan) {
        s.get("d_steps_per_g_step", c.d_steps_per_g_step);
        s.get("discriminator_learning_rate", c.discriminator_learning_rate);
    }
    s.finish();
}

json train_json(const TrainConfig& c, bool gan) {
    json j{{"epochs", c.epochs}, {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
           {"beta1", c.beta1},   {"beta2", c.beta2},           {"eps", c.eps},
           {"seed", c.seed}};
    if (gan) {
        j["d_steps_per_g_step"] = c.d_steps_per_g_step;
        j["discriminator_learning_rate"] =
            c.discriminator_learning_rate ? json(*c.discriminator_learning_rate) : json(nullptr);
    }
    return j;
}

}  // namespace

Config Config::defaults() {
    Config c;
    c.gan.epochs = 300;
    c.gan.batch_size = 32;
    c.gan.learning_rate = 2e-3;
    c.gan.discriminator_learning_rate = 2e-4;
    c.gan.beta1 = 0.5;
    c.gan.seed = 42;
    c.classifier.epochs = 20;
    c.classifier.batch_size = 32;
    c.classifier.learning_rate = 1e-3;
    c.classifier.seed = 42;
    return c;
}

void Config::validate() const {
    if (data.n_per_class == 0) throw ConfigError("data.n_per_class must be >= 1");
    if (data.num_classes < 2 || data.num_classes > 4) throw ConfigError("data.K must be in [2,4]");
    if (!(data.noise_sd >= 0.0)) throw ConfigError("data.noise_sd must be >= 0");
    data.split.validate();
    const std::size_t n = data.n_per_class * data.num_classes;
    const auto train_size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * data.split.train));
    const auto val_size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * data.split.val));
    const std::size_t min_test = ClassifierNet::feature_dim + 1;
    if (train_size + val_size + min_test > n) {
        throw ConfigError("data: the test split must hold at least " + std::to_string(min_test) +
                          " images for the Frechet distance; raise n_per_class or the test fraction");
    }
    try {
        gan.validate(train_size);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("gan: ") + e.what());
    }
    try {
        classifier.validate(train_size);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("classifier: ") + e.what());
    }
    try {
        steer.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("steer: ") + e.what());
    }
    if (eval.n_samples_per_class < 17) throw ConfigError("eval.n_samples_per_class must be >= 17");
    if (eval.grid_samples_per_class == 0) throw ConfigError("eval.grid_samples_per_class must be >= 1");
    if (workdir.empty()) throw ConfigError("paths.workdir must not be empty");
}

Config parse_config(const nlohmann::json& j) {
    Config c = Config::defaults();
    Section root(j, "config");
    if (const json* d = root.child("data")) {
        Section s(*d, "data");
        s.get("n_per_class", c.data.n_per_class);
        s.get("K", c.data.num_classes);
        s.get("noise_sd", c.data.noise_sd);
        s.get("seed", c.data.seed);
        if (const json* sp = s.child("split")) {
            Section t(*sp, "data.split");
            t.get("train", c.data.split.train);
            t.get("val", c.data.split.val);
            t.get("test", c.data.split.test);
            t.finish();
        }
        s.finish();
    }
    if (const json* g = root.child("gan")) read_train(Section(*g, "gan"), c.gan, true);
    if (const json* g = root.child("classifier")) read_train(Section(*g, "classifier"), c.classifier, false);
    if (const json* st = root.child("steer")) {
        Section s(*st, "steer");
        s.get("epochs", c.steer.epochs);
        s.get("batch_size", c.steer.batch_size);
        s.get("steps_per_epoch", c.steer.steps_per_epoch);
        s.get("learning_rate", c.steer.learning_rate);
        s.get("beta1", c.steer.beta1);
        s.get("beta2", c.steer.beta2);
        s.get("eps", c.steer.eps);
        s.get("lambda", c.steer.lambda);
        s.get("sigma_min", c.steer.sigma_min);
        s.get("seed", c.steer.seed);
        s.get("target_accuracy", c.steer.target_accuracy);
        s.finish();
    }
    if (const json* e = root.child("eval")) {
        Section s(*e, "eval");
        s.get("n_samples_per_class", c.eval.n_samples_per_class);
        s.get("grid_samples_per_class", c.eval.grid_samples_per_class);
        s.get("seed", c.eval.seed);
        s.finish();
    }
    if (const json* p = root.child("paths")) {
        Section s(*p, "paths");
        std::string dir = c.workdir.string();
        s.get("workdir", dir);
        c.workdir = dir;
        s.finish();
    }
    root.finish();
    c.data.split.seed = c.data.seed;
    return c;
}

Config load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const Config& c) {
    return {{"data",
             {{"n_per_class", c.data.n_per_class},
              {"K", c.data.num_classes},
              {"noise_sd", c.data.noise_sd},
              {"seed", c.data.seed},
              {"split", {{"train", c.data.split.train}, {"val", c.data.split.val}, {"test", c.data.split.test}}}}},
            {"gan", train_json(c.gan, true)},
            {"classifier", train_json(c.classifier, false)},
            {"steer",
             {{"epochs", c.steer.epochs},
              {"batch_size", c.steer.batch_size},
              {"steps_per_epoch", c.steer.steps_per_epoch},
              {"learning_rate", c.steer.learning_rate},
              {"beta1", c.steer.beta1},
              {"beta2", c.steer.beta2},
              {"eps", c.steer.eps},
              {"lambda", c.steer.lambda},
              {"sigma_min", c.steer.sigma_min},
              {"seed", c.steer.seed},
              {"target_accuracy", c.steer.target_accuracy}}},
            {"eval",
             {{"n_samples_per_class", c.eval.n_samples_per_class},
              {"grid_samples_per_class", c.eval.grid_samples_per_class},
              {"seed", c.eval.seed}}},
            {"paths", {{"workdir", c.workdir.string()}}}};
}

std::string config_hash(const Config& cfg) {
    nlohmann::json j = to_json(cfg);
    j.erase("paths");
    return sha256_hex(j.dump());
}

}  // namespace latsteer
