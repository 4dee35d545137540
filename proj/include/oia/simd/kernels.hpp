#pragma once
// Dense double-precision inner-loop kernels.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a vectorized variant (AVX2+FMA on x86-64, NEON on AArch64).
// The variant is picked once at startup from the CPU capabilities; setting
// OIA_SIMD=scalar in the environment forces the reference path.

#include <cstddef>
#include <string_view>

namespace oia::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    Isa isa;
    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y[i] *= alpha
    void (*scale)(double alpha, double* y, std::size_t n);
    // sum_i x[i]
    double (*sum)(const double* x, std::size_t n);
};

const KernelTable& scalar_kernels();

// Returns nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Kernel table used by the rest of the library.
const KernelTable& active();

std::string_view isa_name(Isa isa);

// Row-major matrix products built on the active dot/axpy kernels.
// All three accumulate into c.
//   gemm_nn: c[m x n] += a[m x k] * b[k x n]
//   gemm_nt: c[m x n] += a[m x k] * b[n x k]^T
//   gemm_tn: c[m x n] += a[k x m]^T * b[k x n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c);

// Same products against an explicit kernel table, for equivalence testing.
void gemm_nn(const KernelTable& kt, std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);
void gemm_nt(const KernelTable& kt, std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);
void gemm_tn(const KernelTable& kt, std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

}  // namespace oia::simd
