#include <algorithm>
#include <cmath>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"

namespace latsteer {
namespace {

Tensor matmul_plain(const Tensor& a, const Tensor& b) {
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor c({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t t = 0; t < k; ++t)
            for (std::size_t j = 0; j < n; ++j) c.at(i, j) += a.at(i, t) * b.at(t, j);
    return c;
}

}  // namespace

std::pair<Tensor, Tensor> mean_and_covariance(const Tensor& samples) {
    if (samples.rank() != 2 || samples.dim(0) < 2) {
        throw ValidationError("covariance needs an [n,d] matrix with n >= 2, got " + to_string(samples.shape()));
    }
    const std::size_t n = samples.dim(0), d = samples.dim(1);
    Tensor mu({d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mu[j] += samples.at(i, j);
    for (double& v : mu.data()) v /= static_cast<double>(n);

    Tensor cov({d, d});
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = samples.at(i, j) - mu[j];
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p; q < d; ++q) cov.at(p, q) += centered[p] * centered[q];
    }
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            cov.at(p, q) /= static_cast<double>(n - 1);
            cov.at(q, p) = cov.at(p, q);
        }
    return {mu, cov};
}

FDResult frechet_distance(const Tensor& x, const Tensor& y) {
    if (x.rank() != 2 || y.rank() != 2 || x.dim(1) != y.dim(1)) {
        throw ShapeError("frechet_distance: expected [n,d] and [m,d], got " + to_string(x.shape()) + " and " +
                         to_string(y.shape()));
    }
    const std::size_t d = x.dim(1);
    if (d > kMaxFrechetDim) {
        throw ValidationError("frechet_distance: feature dimension " + std::to_string(d) + " exceeds " +
                              std::to_string(kMaxFrechetDim));
    }
    if (x.dim(0) < d + 1 || y.dim(0) < d + 1) {
        throw ValidationError("frechet_distance: need at least d+1=" + std::to_string(d + 1) +
                              " samples per set, got " + std::to_string(x.dim(0)) + " and " + std::to_string(y.dim(0)));
    }
    auto [mu_x, cov_x] = mean_and_covariance(x);
    auto [mu_y, cov_y] = mean_and_covariance(y);

    double mean_term = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean_term += (mu_x[j] - mu_y[j]) * (mu_x[j] - mu_y[j]);

    const Tensor root_x = sqrtm_psd(cov_x);
    Tensor inner = matmul_plain(matmul_plain(root_x, cov_y), root_x);
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p + 1; q < d; ++q) {
            const double avg = 0.5 * (inner.at(p, q) + inner.at(q, p));
            inner.at(p, q) = inner.at(q, p) = avg;
        }
    double trace_root = 0.0;
    for (double lambda : jacobi_eigen(inner).values) trace_root += std::sqrt(std::max(lambda, 0.0));

    double trace_x = 0.0, trace_y = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        trace_x += cov_x.at(j, j);
        trace_y += cov_y.at(j, j);
    }
    const double distance = mean_term + trace_x + trace_y - 2.0 * trace_root;
    return {std::max(distance, 0.0), d, x.dim(0), y.dim(0)};
}

}  // namespace latsteer
