#include <algorithm>
#include <cmath>
#include <numeric>

#include "latsteer/error.hpp"
#include "latsteer/eval.hpp"

namespace latsteer {

SymmetricEigen jacobi_eigen(const Tensor& symmetric, std::size_t max_sweeps) {
    if (symmetric.rank() != 2 || symmetric.dim(0) != symmetric.dim(1)) {
        throw ValidationError("jacobi_eigen: expected a square matrix, got " + to_string(symmetric.shape()));
    }
    const std::size_t n = symmetric.dim(0);
    double scale = 0.0;
    for (double v : symmetric.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(symmetric.at(i, j) - symmetric.at(j, i)) > 1e-12 * std::max(scale, 1.0)) {
                throw ValidationError("jacobi_eigen: matrix is not symmetric");
            }
        }
    if (!symmetric.all_finite()) throw NumericalError("jacobi_eigen: matrix has non-finite entries");

    Tensor a = symmetric;
    Tensor v({n, n});
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    auto off_diagonal = [&] {
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) s += a.at(p, q) * a.at(p, q);
        return s;
    };
    double total = 0.0;
    for (double x : a.data()) total += x * x;
    const double threshold = 1e-30 * total;

    SymmetricEigen out;
    std::size_t sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        if (off_diagonal() <= threshold) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that annihilates a[p][q].
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                a.at(p, p) -= t * apq;
                a.at(q, q) += t * apq;
                a.at(p, q) = a.at(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a.at(r, p), arq = a.at(r, q);
                        a.at(r, p) = a.at(p, r) = arp - s * (arq + tau * arp);
                        a.at(r, q) = a.at(q, r) = arq + s * (arp - tau * arq);
                    }
                    const double vrp = v.at(r, p), vrq = v.at(r, q);
                    v.at(r, p) = vrp - s * (vrq + tau * vrp);
                    v.at(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }
    if (off_diagonal() > threshold) {
        throw NumericalError("jacobi_eigen: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a.at(i, i) < a.at(j, j); });
    out.values.resize(n);
    out.vectors = Tensor({n, n});
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a.at(order[j], order[j]);
        for (std::size_t r = 0; r < n; ++r) out.vectors.at(r, j) = v.at(r, order[j]);
    }
    out.sweeps = sweep;
    return out;
}

Tensor sqrtm_psd(const Tensor& symmetric) {
    SymmetricEigen e = jacobi_eigen(symmetric);
    const std::size_t n = e.values.size();
    Tensor out({n, n});
    for (std::size_t k = 0; k < n; ++k) {
        const double root = std::sqrt(std::max(e.values[k], 0.0));
        if (root == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out.at(i, j) += root * e.vectors.at(i, k) * e.vectors.at(j, k);
    }
    return out;
}

}  // namespace latsteer
