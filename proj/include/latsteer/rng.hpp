#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace latsteer {

// Repo-wide seeded generator. The integer stream is std::mt19937_64, whose
// output sequence is fixed by the C++ standard; everything derived from it
// (uniforms, normals, permutations) is computed here rather than through
// <random> distributions, whose algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via the Box-Muller transform; the second value of
    // each pair is cached and returned by the next call.
    double normal();

    // Uniform integer in [0, n) by rejection (no modulo bias).
    std::size_t below(std::size_t n);

    void fill_normal(std::span<double> out);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace latsteer
