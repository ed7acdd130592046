#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"
#include "latsteer/io.hpp"
#include "test_util.hpp"

using namespace latsteer;
using latsteer::testing::random_tensor;

namespace {

Tensor normal_samples(Rng& rng, std::size_t n, std::vector<double> mean, std::vector<double> sd) {
    const std::size_t d = mean.size();
    Tensor t({n, d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) t.at(i, j) = mean[j] + sd[j] * rng.normal();
    return t;
}

// 1-D Frechet distance from the sample moments.
double fd_1d(const Tensor& x, const Tensor& y, std::size_t col) {
    auto moments = [col](const Tensor& t) {
        const std::size_t n = t.dim(0);
        double m = 0;
        for (std::size_t i = 0; i < n; ++i) m += t.at(i, col);
        m /= static_cast<double>(n);
        double v = 0;
        for (std::size_t i = 0; i < n; ++i) v += (t.at(i, col) - m) * (t.at(i, col) - m);
        return std::pair{m, std::sqrt(v / static_cast<double>(n - 1))};
    };
    auto [mx, sx] = moments(x);
    auto [my, sy] = moments(y);
    return (mx - my) * (mx - my) + (sx - sy) * (sx - sy);
}

Tensor random_spd(Rng& rng, std::size_t d) {
    Tensor a = random_tensor(rng, {d, d});
    Tensor s({d, d});
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0;
            for (std::size_t t = 0; t < d; ++t) acc += a.at(t, i) * a.at(t, j);
            s.at(i, j) = acc + (i == j ? 0.1 : 0.0);
        }
    return s;
}

}  // namespace

TEST(ClassificationReport, HandComputedConfusion) {
    const std::vector<std::size_t> t{0, 0, 1, 1}, p{0, 1, 1, 1};
    const ClassReport r = classification_report(t, p, 2);
    EXPECT_DOUBLE_EQ(r.per_class[0].precision, 1.0);
    EXPECT_DOUBLE_EQ(r.per_class[0].recall, 0.5);
    EXPECT_NEAR(r.per_class[0].f1, 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(r.per_class[1].precision, 2.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(r.per_class[1].recall, 1.0);
    EXPECT_NEAR(r.per_class[1].f1, 0.8, 1e-15);
    EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
    EXPECT_EQ(r.per_class[0].support + r.per_class[1].support, 4u);
}

TEST(ClassificationReport, PerfectPredictionsAllOnes) {
    std::vector<std::size_t> y;
    for (std::size_t i = 0; i < 40; ++i) y.push_back(i % 5);
    const ClassReport r = classification_report(y, y, 5);
    for (const auto& m : r.per_class) {
        EXPECT_EQ(m.precision, 1.0);
        EXPECT_EQ(m.recall, 1.0);
        EXPECT_EQ(m.f1, 1.0);
    }
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.macro.f1, 1.0);
    EXPECT_EQ(r.weighted.precision, 1.0);
}

TEST(ClassificationReport, AbsentClassesHaveZeroSupport) {
    const std::vector<std::size_t> y{2, 2, 2};
    const ClassReport r = classification_report(y, y, 4);
    EXPECT_EQ(r.per_class[2].precision, 1.0);
    EXPECT_EQ(r.per_class[2].recall, 1.0);
    for (std::size_t k : {0u, 1u, 3u}) {
        EXPECT_EQ(r.per_class[k].support, 0u);
        EXPECT_EQ(r.per_class[k].f1, 0.0);
    }
    EXPECT_EQ(r.macro.recall, 0.25);
}

TEST(ClassificationReport, RejectsBadLabels) {
    const std::vector<std::size_t> t{0, 3}, p{0, 1};
    EXPECT_THROW(classification_report(t, p, 3), ValidationError);
    const std::vector<std::size_t> empty;
    EXPECT_THROW(classification_report(empty, empty, 3), ValidationError);
    const std::vector<std::size_t> one{0};
    EXPECT_THROW(classification_report(t, one, 4), ValidationError);
}

TEST(ClassificationReport, RandomTotalsAndWeightedRecall) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.below(5), n = 1 + rng.below(60);
        std::vector<std::size_t> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = rng.below(k);
            p[i] = rng.uniform() < 0.7 ? t[i] : rng.below(k);
        }
        const ClassReport r = classification_report(t, p, k);
        std::size_t support = 0, correct = 0;
        for (const auto& m : r.per_class) {
            support += m.support;
            for (double v : {m.precision, m.recall, m.f1}) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
        for (std::size_t i = 0; i < n; ++i) correct += t[i] == p[i];
        EXPECT_EQ(support, n);
        EXPECT_EQ(r.accuracy, static_cast<double>(correct) / static_cast<double>(n));
        EXPECT_EQ(r.weighted.recall, r.accuracy);
    }
}

TEST(ClassificationReport, TableAndJsonLayout) {
    const std::vector<std::size_t> t{0, 0, 1, 1}, p{0, 1, 1, 1};
    const ClassReport r = classification_report(t, p, 2);
    const std::string table = render_table(r);
    EXPECT_NE(table.find("precision"), std::string::npos);
    EXPECT_NE(table.find("macro avg"), std::string::npos);
    EXPECT_NE(table.find("weighted avg"), std::string::npos);
    EXPECT_NE(table.find("0.75"), std::string::npos);
    const auto j = to_json(r);
    EXPECT_EQ(j["per_class"].size(), 2u);
    EXPECT_EQ(j["accuracy"].get<double>(), 0.75);
}

TEST(Jacobi, MatchesEigenOracle) {
    Rng rng(11);
    for (std::size_t d : {1u, 2u, 3u, 7u, 16u}) {
        const Tensor s = random_spd(rng, d);
        Eigen::MatrixXd m(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) m(i, j) = s.at(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(m);
        const SymmetricEigen e = jacobi_eigen(s);
        for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(e.values[i], oracle.eigenvalues()(i), 1e-10 * (1 + std::abs(e.values[i])));
        // V diag(values) V^T reconstructs the input.
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double acc = 0;
                for (std::size_t t = 0; t < d; ++t) acc += e.vectors.at(i, t) * e.values[t] * e.vectors.at(j, t);
                EXPECT_NEAR(acc, s.at(i, j), 1e-10);
            }
    }
}

TEST(Jacobi, SqrtmSquaresBack) {
    Rng rng(12);
    const Tensor s = random_spd(rng, 6);
    const Tensor r = sqrtm_psd(s);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) {
            double acc = 0;
            for (std::size_t t = 0; t < 6; ++t) acc += r.at(i, t) * r.at(t, j);
            EXPECT_NEAR(acc, s.at(i, j), 1e-10);
        }
}

TEST(Jacobi, RejectsAsymmetric) {
    EXPECT_THROW(jacobi_eigen(Tensor::matrix({{1, 2}, {0, 1}})), ValidationError);
    EXPECT_THROW(jacobi_eigen(Tensor::zeros({2, 3})), ValidationError);
}

TEST(Frechet, IdenticalSamplesAreZero) {
    Rng rng(21);
    const Tensor x = normal_samples(rng, 500, std::vector<double>(16, 0.3), std::vector<double>(16, 1.5));
    EXPECT_LT(frechet_distance(x, x).distance, 1e-8);
}

TEST(Frechet, OneDimensionalClosedForm) {
    Rng rng(22);
    const Tensor x = normal_samples(rng, 100000, {0.0}, {1.0});
    const Tensor y = normal_samples(rng, 100000, {1.0}, {1.0});
    const FDResult r = frechet_distance(x, y);
    EXPECT_NEAR(r.distance, 1.0, 0.05);
    EXPECT_EQ(r.feature_dim, 1u);
    EXPECT_EQ(r.n_real, 100000u);
}

TEST(Frechet, DiagonalMatchesCoordinateSum) {
    // Independent coordinates with different scales; the sample covariance is
    // made exactly diagonal by pairing each draw with its sign flip.
    Rng rng(23);
    auto diag_set = [&rng](double m0, double s0, double m1, double s1) {
        const std::size_t half = 200;
        Tensor t({4 * half, 2});
        for (std::size_t i = 0; i < half; ++i) {
            const double a = rng.normal(), b = rng.normal();
            const double rows[4][2] = {{a, b}, {-a, b}, {a, -b}, {-a, -b}};
            for (std::size_t r = 0; r < 4; ++r) {
                t.at(4 * i + r, 0) = m0 + s0 * rows[r][0];
                t.at(4 * i + r, 1) = m1 + s1 * rows[r][1];
            }
        }
        return t;
    };
    const Tensor x = diag_set(0.0, 1.0, 2.0, 0.5);
    const Tensor y = diag_set(1.0, 2.0, -1.0, 3.0);
    const double expected = fd_1d(x, y, 0) + fd_1d(x, y, 1);
    EXPECT_NEAR(frechet_distance(x, y).distance, expected, 1e-8);
}

TEST(Frechet, Symmetric) {
    Rng rng(24);
    for (int trial = 0; trial < 5; ++trial) {
        const Tensor x = random_tensor(rng, {60, 5});
        const Tensor y = random_tensor(rng, {80, 5}, -1.0, 3.0);
        EXPECT_NEAR(frechet_distance(x, y).distance, frechet_distance(y, x).distance, 1e-8);
    }
}

TEST(Frechet, Preconditions) {
    Rng rng(25);
    EXPECT_THROW(frechet_distance(random_tensor(rng, {4, 4}), random_tensor(rng, {10, 4})),
                 ValidationError);
    EXPECT_THROW(frechet_distance(random_tensor(rng, {40, 17}), random_tensor(rng, {40, 17})),
                 ValidationError);
    EXPECT_THROW(frechet_distance(random_tensor(rng, {40, 3}), random_tensor(rng, {40, 4})),
                 ShapeError);
}

TEST(Features, ShapeAndManualSlice) {
    const ClassifierNet clf = ClassifierNet::init(4, 3);
    Rng rng(31);
    const Tensor imgs = random_tensor(rng, {5, 8, 8}, 0.0, 1.0);
    const Tensor f = features(clf, imgs);
    ASSERT_EQ(f.shape(), (Shape{5, 16}));
    EXPECT_TRUE(f.bit_equal(features(clf, imgs)));
    for (std::size_t i = 0; i < 5; ++i) {
        Tensor one({8, 8}, std::vector<double>(imgs.raw() + i * 64, imgs.raw() + (i + 1) * 64));
        const Tensor single = clf.forward(nearest_upsample(one, 2)).second;
        for (std::size_t j = 0; j < 16; ++j) EXPECT_EQ(f.at(i, j), single[j]);
    }
    EXPECT_THROW(features(clf, Tensor::zeros({2, 16, 16})), ShapeError);
}

TEST(Features, PooledPixelsAreBlockMeans) {
    Tensor img({1, 8, 8});
    for (std::size_t i = 0; i < 64; ++i) img[i] = static_cast<double>(i);
    const Tensor p = pooled_pixels(img);
    EXPECT_EQ(p.at(0, 0), (0 + 1 + 8 + 9) / 4.0);
    EXPECT_EQ(p.at(0, 15), (54 + 55 + 62 + 63) / 4.0);
}

TEST(LatentDiagnostics, SymmetricZeroDiagonal) {
    const InputGeneratorNet ig = InputGeneratorNet::init(4, 1e-4, 8);
    const LatentDiagnostics d = latent_diagnostics(ig);
    ASSERT_EQ(d.mu.size(), 4u);
    for (std::size_t a = 0; a < 4; ++a) {
        EXPECT_EQ(d.mu_distance[a][a], 0.0);
        EXPECT_GT(d.mean_sigma[a], 1e-4);
        for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(d.mu_distance[a][b], d.mu_distance[b][a]);
    }
    EXPECT_TRUE(to_json(d).contains("min_pairwise_mu_distance"));
}

TEST(Ppm, SingleWhiteImage) {
    const std::string ppm = encode_grid_ppm(Tensor::full({1, 8, 8}, 1.0), 1);
    const std::string header = "P6\n8 8\n255\n";
    ASSERT_EQ(ppm.size(), header.size() + 8 * 8 * 3);
    EXPECT_EQ(ppm.substr(0, header.size()), header);
    for (std::size_t i = header.size(); i < ppm.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(ppm[i]), 255);
}

TEST(Ppm, GridCanvasRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "latsteer_eval_grid.ppm";
    export_grid_ppm(Tensor::full({4, 8, 8}, 0.5), 2, path);
    const std::string bytes = read_file(path);
    std::istringstream in(bytes);
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    EXPECT_EQ(magic, "P6");
    EXPECT_EQ(w, 17u);
    EXPECT_EQ(h, 17u);
    EXPECT_EQ(maxval, 255u);
    const std::size_t data = static_cast<std::size_t>(in.tellg());
    ASSERT_EQ(bytes.size() - data, 17u * 17u * 3u);
    // Separator row 8 is black, pixel (0,0) is round(127.5) = 128.
    EXPECT_EQ(static_cast<unsigned char>(bytes[data]), 128);
    EXPECT_EQ(static_cast<unsigned char>(bytes[data + (8 * 17 + 3) * 3]), 0);
    std::filesystem::remove(path);
}

TEST(Ppm, Preconditions) {
    EXPECT_THROW(encode_grid_ppm(Tensor::zeros({1, 8, 8}), 0), ValidationError);
    EXPECT_THROW(export_grid_ppm(Tensor::zeros({1, 8, 8}), 1, "/proc/nope/grid.ppm"), IoError);
}
