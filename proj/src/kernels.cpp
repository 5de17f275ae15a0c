#include "inslab/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace inslab::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double gather_dot_scalar(const double* w, const std::int32_t* idx,
                         std::size_t n, const double* table) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * table[idx[i]];
    return acc;
}

}  // namespace detail

namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Backend> g_backend{cpu_has_avx2() ? Backend::avx2 : Backend::scalar};

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void force_backend(Backend b) {
    if (b == Backend::avx2 && !cpu_has_avx2())
        throw std::runtime_error("kernels: AVX2 backend requested but CPU lacks AVX2/FMA");
    g_backend.store(b, std::memory_order_relaxed);
}

void reset_backend() {
    g_backend.store(cpu_has_avx2() ? Backend::avx2 : Backend::scalar,
                    std::memory_order_relaxed);
}

#if defined(__x86_64__) || defined(_M_X64)
#define INSLAB_DISPATCH(fn, ...)                              \
    (active_backend() == Backend::avx2 ? detail::fn##_avx2(__VA_ARGS__) \
                                       : detail::fn##_scalar(__VA_ARGS__))
#else
#define INSLAB_DISPATCH(fn, ...) detail::fn##_scalar(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) {
    return INSLAB_DISPATCH(dot, a, b, n);
}

double sum(const double* a, std::size_t n) { return INSLAB_DISPATCH(sum, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    INSLAB_DISPATCH(axpy, alpha, x, y, n);
}

double gather_dot(const double* w, const std::int32_t* idx, std::size_t n,
                  const double* table) {
    return INSLAB_DISPATCH(gather_dot, w, idx, n, table);
}

#undef INSLAB_DISPATCH

}  // namespace inslab::kernels
