#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "latsteer/tensor.hpp"

namespace latsteer {

inline constexpr std::size_t kImageSide = 8;

// N labeled grayscale images, pixels in [0,1].
struct Dataset {
    Tensor images;                      // [N, H, W]
    std::vector<std::uint8_t> labels;   // N entries, each < num_classes
    std::size_t num_classes = 0;
    std::uint64_t seed = 0;
    double noise_sd = 0.0;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t height() const { return images.dim(1); }
    std::size_t width() const { return images.dim(2); }
    // Images flattened to [N, H*W].
    Tensor flat() const { return images.reshaped({size(), height() * width()}); }
    Dataset subset(std::span<const std::size_t> indices) const;
    // Throws ValidationError if any invariant is broken.
    void validate() const;
    bool bit_equal(const Dataset& other) const;
};

// Class k's 8x8 template: background 0.1 with a 4x4 block of 0.9 in quadrant
// k (0 top-left, 1 top-right, 2 bottom-left, 3 bottom-right).
Tensor block_archetype(std::size_t k);

// n_per_class * K samples, labels round-robin (sample i has class i % K),
// each pixel = archetype + N(0, noise_sd^2) clamped to [0,1].
Dataset make_blocks(std::size_t n_per_class, std::size_t num_classes, double noise_sd, std::uint64_t seed);

struct SplitSpec {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DatasetSplits {
    Dataset train;
    Dataset val;
    Dataset test;
};

// Seeded permutation, then contiguous slices of round(N*train) and
// round(N*val) indices; test gets the rest. Any empty split is rejected.
DatasetSplits split(const Dataset& ds, const SplitSpec& spec);

// Binary "LSDS" v1 format, little-endian:
//   "LSDS" u32 version u32 N u32 H u32 W u32 K f64 noise_sd u64 seed
//   N*H*W f64 pixels, N u8 labels
std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace latsteer
