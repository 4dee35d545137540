#include <cstdlib>
#include <string_view>

#include "oia/simd/kernels.hpp"

namespace oia::simd {
namespace {

const KernelTable& select_kernels() {
    if (const char* env = std::getenv("OIA_SIMD"); env != nullptr && std::string_view(env) == "scalar") {
        return scalar_kernels();
    }
    if (const KernelTable* t = avx2_kernels()) return *t;
    if (const KernelTable* t = neon_kernels()) return *t;
    return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select_kernels();
    return table;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

void gemm_nn(const KernelTable& kt, std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        const double* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av != 0.0) kt.axpy(av, b + p * n, crow, n);
        }
    }
}

void gemm_nt(const KernelTable& kt, std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += kt.dot(arow, b + j * k, k);
    }
}

void gemm_tn(const KernelTable& kt, std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const double av = arow[i];
            if (av != 0.0) kt.axpy(av, brow, c + i * n, n);
        }
    }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    gemm_nn(active(), m, n, k, a, b, c);
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    gemm_nt(active(), m, n, k, a, b, c);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b, double* c) {
    gemm_tn(active(), m, n, k, a, b, c);
}

}  // namespace oia::simd
