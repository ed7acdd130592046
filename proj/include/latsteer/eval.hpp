#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "latsteer/nets.hpp"
#include "latsteer/tensor.hpp"

namespace latsteer {

// ---- classification report ----

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct ClassReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    ClassMetrics macro;     // support = N
    ClassMetrics weighted;  // support = N
    std::size_t total = 0;
};

// precision = TP/(TP+FP), recall = TP/(TP+FN), each 0 when the denominator
// is 0; F1 is their harmonic mean (0 when both are 0).
ClassReport classification_report(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                                  std::size_t num_classes);

nlohmann::json to_json(const ClassReport& report);
// Aligned text table: one row per class, then accuracy, macro avg and
// weighted avg rows.
std::string render_table(const ClassReport& report);

// ---- symmetric eigendecomposition ----

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Tensor vectors;              // [d,d]; column j pairs with values[j]
    std::size_t sweeps = 0;
};

// Cyclic Jacobi rotations. Throws ValidationError if the input is not a
// square symmetric matrix and NumericalError if off-diagonal mass has not
// vanished after max_sweeps sweeps.
SymmetricEigen jacobi_eigen(const Tensor& symmetric, std::size_t max_sweeps = 100);

// Principal square root of a symmetric PSD matrix; negative eigenvalues
// (numerical noise) are clamped to zero.
Tensor sqrtm_psd(const Tensor& symmetric);

// ---- Frechet distance ----

struct FDResult {
    double distance = 0.0;
    std::size_t feature_dim = 0;
    std::size_t n_real = 0;
    std::size_t n_gen = 0;
};

inline constexpr std::size_t kMaxFrechetDim = 16;

// Frechet distance between Gaussian fits (unbiased covariance) of the rows of
// X [n,d] and Y [m,d]:
//   |mu_x - mu_y|^2 + Tr(Sx + Sy - 2 (Sx^1/2 Sy Sx^1/2)^1/2), clamped at 0.
// Requires n, m >= d+1 and d <= 16.
FDResult frechet_distance(const Tensor& x, const Tensor& y);

// Mean of (sample mean, unbiased covariance) over rows of [n,d].
std::pair<Tensor, Tensor> mean_and_covariance(const Tensor& samples);

// ---- features ----

// Penultimate classifier activations for 8x8 images [n,8,8] after 2x
// nearest upsampling; returns [n,16].
Tensor features(const ClassifierNet& clf, const Tensor& images);

// Each 8x8 image pooled to 4x4 by 2x2 block means; returns [n,16]. Used as
// a classifier-free pixel summary.
Tensor pooled_pixels(const Tensor& images);

// Frozen-classifier predictions (argmax logits) for [n,8,8] images.
std::vector<std::size_t> classify(const ClassifierNet& clf, const Tensor& images);

// ---- latent diagnostics ----

struct LatentDiagnostics {
    std::vector<Tensor> mu;            // per class, [8]
    std::vector<double> mean_sigma;    // per class
    std::vector<std::vector<double>> mu_distance;  // [K][K] Euclidean
};

LatentDiagnostics latent_diagnostics(const InputGeneratorNet& ig);
nlohmann::json to_json(const LatentDiagnostics& diag);

// ---- image grids ----

// Binary P6 PPM; grayscale replicated to RGB, pixel = round(255 clamp(v,0,1)),
// tiles row-major with 1-pixel black separators between them.
std::string encode_grid_ppm(const Tensor& images, std::size_t cols);
void export_grid_ppm(const Tensor& images, std::size_t cols, const std::filesystem::path& path);

}  // namespace latsteer
