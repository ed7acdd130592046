#include <cmath>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"

namespace latsteer {

Tensor features(const ClassifierNet& clf, const Tensor& images) {
    if (images.rank() != 3 || images.dim(1) != 8 || images.dim(2) != 8) {
        throw ShapeError("features: expected [n,8,8] images, got " + to_string(images.shape()));
    }
    return clf.forward(nearest_upsample(images, 2)).second;
}

std::vector<std::size_t> classify(const ClassifierNet& clf, const Tensor& images) {
    if (images.rank() != 3 || images.dim(1) != 8 || images.dim(2) != 8) {
        throw ShapeError("classify: expected [n,8,8] images, got " + to_string(images.shape()));
    }
    return argmax_rows(clf.forward(nearest_upsample(images, 2)).first);
}

Tensor pooled_pixels(const Tensor& images) {
    if (images.rank() != 3 || images.dim(1) != 8 || images.dim(2) != 8) {
        throw ShapeError("pooled_pixels: expected [n,8,8] images, got " + to_string(images.shape()));
    }
    const std::size_t n = images.dim(0);
    Tensor out({n, 16});
    for (std::size_t i = 0; i < n; ++i) {
        const double* img = images.raw() + i * 64;
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 4; ++c) {
                const std::size_t base = 2 * r * 8 + 2 * c;
                out.at(i, r * 4 + c) = 0.25 * (img[base] + img[base + 1] + img[base + 8] + img[base + 9]);
            }
    }
    return out;
}

LatentDiagnostics latent_diagnostics(const InputGeneratorNet& ig) {
    const std::size_t k = ig.num_classes;
    LatentDiagnostics d;
    for (std::size_t c = 0; c < k; ++c) {
        auto [mu, sigma] = ig.forward(Tensor::one_hot(c, k));
        d.mu.push_back(mu.reshaped({mu.size()}));
        double s = 0.0;
        for (double v : sigma.data()) s += v;
        d.mean_sigma.push_back(s / static_cast<double>(sigma.size()));
    }
    d.mu_distance.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            double s = 0.0;
            for (std::size_t j = 0; j < d.mu[a].size(); ++j) s += (d.mu[a][j] - d.mu[b][j]) * (d.mu[a][j] - d.mu[b][j]);
            d.mu_distance[a][b] = d.mu_distance[b][a] = std::sqrt(s);
        }
    return d;
}

nlohmann::json to_json(const LatentDiagnostics& diag) {
    nlohmann::json mus = nlohmann::json::array();
    for (const Tensor& m : diag.mu) mus.push_back(std::vector<double>(m.data().begin(), m.data().end()));
    double min_dist = 0.0;
    bool first = true;
    for (std::size_t a = 0; a < diag.mu_distance.size(); ++a)
        for (std::size_t b = a + 1; b < diag.mu_distance.size(); ++b) {
            if (first || diag.mu_distance[a][b] < min_dist) min_dist = diag.mu_distance[a][b];
            first = false;
        }
    return {{"mu", mus},
            {"mean_sigma", diag.mean_sigma},
            {"mu_distance", diag.mu_distance},
            {"min_pairwise_mu_distance", min_dist}};
}

}  // namespace latsteer
