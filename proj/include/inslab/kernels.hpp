#pragma once

// Arithmetic inner loops shared by the tabular planners and the correlation
// estimator. Each kernel has a scalar reference implementation and an AVX2
// variant; the active variant is picked once at startup from CPUID and can be
// overridden (tests pin the scalar backend to check equivalence).

#include <cstddef>
#include <cstdint>

namespace inslab::kernels {

enum class Backend { scalar, avx2 };

// Backend selected for this process (cpuid-based unless forced).
Backend active_backend();

// Force a specific backend, or pass `reset=true` to return to auto-detection.
// Forcing avx2 on a CPU without it is rejected.
void force_backend(Backend b);
void reset_backend();

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i a[i]
double sum(const double* a, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// sum_i w[i] * table[idx[i]]  (indices are element offsets into `table`)
double gather_dot(const double* w, const std::int32_t* idx, std::size_t n,
                  const double* table);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double gather_dot_scalar(const double* w, const std::int32_t* idx,
                         std::size_t n, const double* table);
#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_avx2(const double* a, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double gather_dot_avx2(const double* w, const std::int32_t* idx, std::size_t n,
                       const double* table);
#endif
}  // namespace detail

}  // namespace inslab::kernels
