// Compiled with -mavx2. Only reached through avx2_kernels() after a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <vector>

#include "latsteer/kernels.hpp"

namespace latsteer::kernels {
namespace {

constexpr std::size_t kLanes = 4;

// Shared body of gemm_nn / gemm_tn: row i of A is read with stride a_stride
// between consecutive t, starting at a_row.
inline void gemm_row(const double* a_row, std::size_t a_stride, const double* b, double* c_row, std::size_t k,
                     std::size_t n, bool accumulate) {
    std::size_t j = 0;
    for (; j + 4 * kLanes <= n; j += 4 * kLanes) {
        __m256d acc0 = accumulate ? _mm256_loadu_pd(c_row + j) : _mm256_setzero_pd();
        __m256d acc1 = accumulate ? _mm256_loadu_pd(c_row + j + 4) : _mm256_setzero_pd();
        __m256d acc2 = accumulate ? _mm256_loadu_pd(c_row + j + 8) : _mm256_setzero_pd();
        __m256d acc3 = accumulate ? _mm256_loadu_pd(c_row + j + 12) : _mm256_setzero_pd();
        for (std::size_t t = 0; t < k; ++t) {
            const __m256d av = _mm256_set1_pd(a_row[t * a_stride]);
            const double* bt = b + t * n + j;
            acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, _mm256_loadu_pd(bt)));
            acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, _mm256_loadu_pd(bt + 4)));
            acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(av, _mm256_loadu_pd(bt + 8)));
            acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(av, _mm256_loadu_pd(bt + 12)));
        }
        _mm256_storeu_pd(c_row + j, acc0);
        _mm256_storeu_pd(c_row + j + 4, acc1);
        _mm256_storeu_pd(c_row + j + 8, acc2);
        _mm256_storeu_pd(c_row + j + 12, acc3);
    }
    for (; j + kLanes <= n; j += kLanes) {
        __m256d acc = accumulate ? _mm256_loadu_pd(c_row + j) : _mm256_setzero_pd();
        for (std::size_t t = 0; t < k; ++t) {
            const __m256d av = _mm256_set1_pd(a_row[t * a_stride]);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(av, _mm256_loadu_pd(b + t * n + j)));
        }
        _mm256_storeu_pd(c_row + j, acc);
    }
    for (; j < n; ++j) {
        double acc = accumulate ? c_row[j] : 0.0;
        for (std::size_t t = 0; t < k; ++t) acc += a_row[t * a_stride] * b[t * n + j];
        c_row[j] = acc;
    }
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) gemm_row(a + i * k, 1, b, c + i * n, k, n, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) gemm_row(a + i, m, b, c + i * n, k, n, accumulate);
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
    // Pack B^T so the column loop becomes contiguous.
    thread_local std::vector<double> bt;
    bt.resize(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t t = 0; t < k; ++t) bt[t * n + j] = b[j * k + t];
    for (std::size_t i = 0; i < m; ++i) gemm_row(a + i * k, 1, bt.data(), c + i * n, k, n, accumulate);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), prod));
    }
    for (; i < n; ++i) out[i] += a[i] * b[i];
}

void leaky_relu(const double* x, double* y, std::size_t n, double slope) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d sv = _mm256_set1_pd(slope);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d xv = _mm256_loadu_pd(x + i);
        const __m256d positive = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
        _mm256_storeu_pd(y + i, _mm256_blendv_pd(_mm256_mul_pd(sv, xv), xv, positive));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : slope * x[i];
}

void leaky_relu_backward(const double* x, const double* gy, double* gx, std::size_t n, double slope) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d sv = _mm256_set1_pd(slope);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d positive = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        const __m256d factor = _mm256_blendv_pd(sv, one, positive);
        const __m256d prod = _mm256_mul_pd(factor, _mm256_loadu_pd(gy + i));
        _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), prod));
    }
    for (; i < n; ++i) gx[i] += (x[i] > 0.0 ? 1.0 : slope) * gy[i];
}

void adam_update(double* param, double* m, double* v, const double* grad, std::size_t n, const AdamCoeffs& c) {
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    const __m256d b1 = _mm256_set1_pd(c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2);
    const __m256d omb1 = _mm256_set1_pd(one_minus_b1);
    const __m256d omb2 = _mm256_set1_pd(one_minus_b2);
    const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
    const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
    const __m256d lr = _mm256_set1_pd(c.lr);
    const __m256d eps = _mm256_set1_pd(c.eps);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const __m256d g = _mm256_loadu_pd(grad + i);
        const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, g));
        const __m256d vv =
            _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d m_hat = _mm256_div_pd(mv, bc1);
        const __m256d v_hat = _mm256_div_pd(vv, bc2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
        _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
    }
    for (; i < n; ++i) {
        const double g = grad[i];
        m[i] = c.beta1 * m[i] + one_minus_b1 * g;
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g * g);
        const double m_hat = m[i] / c.bias_correction1;
        const double v_hat = v[i] / c.bias_correction2;
        param[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        "avx2", gemm_nn, gemm_tn, gemm_nt, axpy, add, mul, mul_acc, leaky_relu, leaky_relu_backward, adam_update,
    };
    return table;
}

}  // namespace latsteer::kernels
