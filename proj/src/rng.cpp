#include "latsteer/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace latsteer {

double Rng::normal() {
    if (spare_) {
        double z = *spare_;
        spare_.reset();
        return z;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    return r * std::cos(angle);
}

std::size_t Rng::below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

void Rng::fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = below(i);
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace latsteer
