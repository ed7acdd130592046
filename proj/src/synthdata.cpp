#include "latsteer/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "latsteer/error.hpp"
#include "latsteer/io.hpp"
#include "latsteer/rng.hpp"

namespace latsteer {
namespace {

constexpr char kMagic[4] = {'L', 'S', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 5 * 4 + 8 + 8;

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    const std::size_t pixels = height() * width();
    Dataset out;
    out.images = Tensor({indices.size(), height(), width()});
    out.labels.reserve(indices.size());
    out.num_classes = num_classes;
    out.seed = seed;
    out.noise_sd = noise_sd;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        if (src >= size()) throw ValidationError("subset index " + std::to_string(src) + " out of range");
        std::copy_n(images.raw() + src * pixels, pixels, out.images.raw() + i * pixels);
        out.labels.push_back(labels[src]);
    }
    return out;
}

void Dataset::validate() const {
    if (images.rank() != 3) throw ValidationError("dataset images must be [N,H,W], got " + to_string(images.shape()));
    if (images.dim(0) != labels.size()) {
        throw ValidationError("dataset has " + std::to_string(images.dim(0)) + " images but " +
                              std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) {
            throw ValidationError("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                                  " is not < K=" + std::to_string(num_classes));
        }
    }
    for (double v : images.data()) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("dataset pixel outside [0,1]: " + std::to_string(v));
    }
    if (!(noise_sd >= 0.0)) throw ValidationError("noise_sd must be >= 0");
}

bool Dataset::bit_equal(const Dataset& other) const {
    return images.bit_equal(other.images) && labels == other.labels && num_classes == other.num_classes &&
           seed == other.seed && std::memcmp(&noise_sd, &other.noise_sd, sizeof(double)) == 0;
}

Tensor block_archetype(std::size_t k) {
    if (k > 3) throw ValidationError("block archetypes exist for classes 0..3, got " + std::to_string(k));
    Tensor img = Tensor::full({kImageSide, kImageSide}, 0.1);
    const std::size_t r0 = (k / 2) * 4, c0 = (k % 2) * 4;
    for (std::size_t r = r0; r < r0 + 4; ++r)
        for (std::size_t c = c0; c < c0 + 4; ++c) img.at(r, c) = 0.9;
    return img;
}

Dataset make_blocks(std::size_t n_per_class, std::size_t num_classes, double noise_sd, std::uint64_t seed) {
    if (num_classes < 2 || num_classes > 4) {
        throw ValidationError("make_blocks: K must be in [2,4], got " + std::to_string(num_classes));
    }
    if (n_per_class < 1) throw ValidationError("make_blocks: n_per_class must be >= 1");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ValidationError("make_blocks: noise_sd must be >= 0");

    std::vector<Tensor> archetypes;
    for (std::size_t k = 0; k < num_classes; ++k) archetypes.push_back(block_archetype(k));

    const std::size_t n = n_per_class * num_classes;
    const std::size_t pixels = kImageSide * kImageSide;
    Dataset ds;
    ds.images = Tensor({n, kImageSide, kImageSide});
    ds.labels.resize(n);
    ds.num_classes = num_classes;
    ds.seed = seed;
    ds.noise_sd = noise_sd;

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = i % num_classes;
        ds.labels[i] = static_cast<std::uint8_t>(k);
        double* dst = ds.images.raw() + i * pixels;
        const double* src = archetypes[k].raw();
        for (std::size_t p = 0; p < pixels; ++p) {
            dst[p] = std::clamp(src[p] + noise_sd * rng.normal(), 0.0, 1.0);
        }
    }
    return ds;
}

void SplitSpec::validate() const {
    if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0)) {
        throw ValidationError("split fractions must all be positive");
    }
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
}

DatasetSplits split(const Dataset& ds, const SplitSpec& spec) {
    spec.validate();
    const std::size_t n = ds.size();
    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train));
    const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.val));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
        throw ValidationError("split of " + std::to_string(n) + " samples leaves an empty partition (train " +
                              std::to_string(n_train) + ", val " + std::to_string(n_val) + ")");
    }
    Rng rng(spec.seed);
    const std::vector<std::size_t> perm = rng.permutation(n);
    std::span<const std::size_t> all(perm);
    return DatasetSplits{ds.subset(all.subspan(0, n_train)), ds.subset(all.subspan(n_train, n_val)),
                         ds.subset(all.subspan(n_train + n_val))};
}

std::string encode_dataset(const Dataset& ds) {
    ds.validate();
    std::string out(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(ds.size()));
    put_u32(out, static_cast<std::uint32_t>(ds.height()));
    put_u32(out, static_cast<std::uint32_t>(ds.width()));
    put_u32(out, static_cast<std::uint32_t>(ds.num_classes));
    put_f64(out, ds.noise_sd);
    put_u64(out, ds.seed);
    out.reserve(out.size() + ds.images.size() * 8 + ds.size());
    for (double v : ds.images.data()) put_f64(out, v);
    for (std::uint8_t l : ds.labels) out.push_back(static_cast<char>(l));
    return out;
}

Dataset decode_dataset(std::string_view bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("not an LSDS dataset: bad magic bytes", 0);
    }
    if (bytes.size() < kHeaderBytes) {
        throw FormatError("truncated LSDS header: expected " + std::to_string(kHeaderBytes) + " bytes, got " +
                              std::to_string(bytes.size()),
                          bytes.size());
    }
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kVersion) {
        throw VersionMismatchError("unsupported LSDS version " + std::to_string(version) + " (expected " +
                                       std::to_string(kVersion) + ")",
                                   4);
    }
    const std::uint64_t n = get_u32(bytes, 8), h = get_u32(bytes, 12), w = get_u32(bytes, 16);
    const std::uint32_t k = get_u32(bytes, 20);
    if (n == 0 || h == 0 || w == 0) throw FormatError("LSDS header declares an empty dataset", 8);
    if (k == 0 || k > 256) throw FormatError("LSDS header declares invalid class count " + std::to_string(k), 20);

    const std::uint64_t expected = kHeaderBytes + n * h * w * 8 + n;
    if (bytes.size() != expected) {
        throw FormatError("LSDS payload length mismatch: expected " + std::to_string(expected) + " bytes, got " +
                              std::to_string(bytes.size()),
                          std::min<std::uint64_t>(bytes.size(), expected));
    }

    Dataset ds;
    ds.noise_sd = get_f64(bytes, 24);
    ds.seed = get_u64(bytes, 32);
    ds.num_classes = k;
    ds.images = Tensor({n, h, w});
    std::size_t off = kHeaderBytes;
    for (std::size_t i = 0; i < ds.images.size(); ++i, off += 8) {
        const double v = get_f64(bytes, off);
        if (!(v >= 0.0 && v <= 1.0)) throw FormatError("LSDS pixel outside [0,1]", off);
        ds.images[i] = v;
    }
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i, ++off) {
        const auto l = static_cast<std::uint8_t>(bytes[off]);
        if (l >= k) throw FormatError("LSDS label " + std::to_string(l) + " is not < K=" + std::to_string(k), off);
        ds.labels[i] = l;
    }
    if (!(ds.noise_sd >= 0.0)) throw FormatError("LSDS noise_sd is negative or NaN", 24);
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) { write_file(path, encode_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace latsteer
