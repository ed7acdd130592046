#pragma once

// Dense double-precision inner loops used by the autodiff ops and the
// optimizer. Each kernel has a scalar reference implementation and, on
// x86-64, an AVX2 implementation chosen at runtime.
//
// Every vectorized kernel performs the same IEEE operations in the same
// order as its scalar reference (SIMD lanes run across independent output
// elements, never across a reduction), so the two variants agree bit for
// bit. The whole project builds with -ffp-contract=off to keep it that way.

#include <cstddef>
#include <string_view>

namespace latsteer::kernels {

struct AdamCoeffs {
    double lr;
    double beta1;
    double beta2;
    double eps;
    double bias_correction1;  // 1 - beta1^t
    double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
    const char* name;

    // C[m,n] (+)= A[m,k] * B[k,n]. Each C[i,j] starts from 0 (or its old
    // value when accumulate) and adds A[i,t]*B[t,j] for t = 0..k-1.
    void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
                    bool accumulate);
    // C[m,n] (+)= A[k,m]^T * B[k,n], summed over t = 0..k-1.
    void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
                    bool accumulate);
    // C[m,n] (+)= A[m,k] * B[n,k]^T, summed over t = 0..k-1.
    void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
                    bool accumulate);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out = a + b
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    // out = a * b
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    // out += a * b
    void (*mul_acc)(const double* a, const double* b, double* out, std::size_t n);
    // y = x > 0 ? x : slope * x   (slope 0 gives relu)
    void (*leaky_relu)(const double* x, double* y, std::size_t n, double slope);
    // gx += (x > 0 ? 1 : slope) * gy
    void (*leaky_relu_backward)(const double* x, const double* gy, double* gx, std::size_t n, double slope);
    // One Adam step over a contiguous parameter block.
    void (*adam_update)(double* param, double* m, double* v, const double* grad, std::size_t n,
                        const AdamCoeffs& c);
};

const KernelTable& scalar_kernels();

// nullptr when AVX2 is not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

// The table used by the library. Picks AVX2 when available unless the
// LATSTEER_ISA environment variable is set to "scalar".
const KernelTable& active_kernels();

// Override the runtime choice ("scalar" or "avx2"). Returns false when the
// requested variant is unavailable.
bool select_kernels(std::string_view name);

}  // namespace latsteer::kernels
