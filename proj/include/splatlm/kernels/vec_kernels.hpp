#pragma once

#include <cstddef>

namespace splatlm::kernels {

// Flat-vector arithmetic used by the PCG solver, optimizer updates and image
// reductions. Each operation has a scalar reference implementation and an
// AVX2 variant; the active backend is chosen at runtime from CPU features and
// can be forced for equivalence testing. SIMD results may differ from scalar
// by floating-point reassociation in the reductions; a given backend is
// bitwise reproducible run to run.
enum class Backend { kScalar, kAvx2 };

Backend active_backend();
bool backend_supported(Backend b);
// Returns false (and leaves the dispatch unchanged) if unsupported.
bool set_backend(Backend b);
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double sum_squared_diff(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y = x + beta * y
void xpby(const double* x, double beta, double* y, std::size_t n);
// out = a * b, elementwise
void hadamard(const double* a, const double* b, double* out, std::size_t n);
// x *= alpha
void scale(double alpha, double* x, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_squares_scalar(const double* x, std::size_t n);
double sum_squared_diff_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void xpby_scalar(const double* x, double beta, double* y, std::size_t n);
void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n);
void scale_scalar(double alpha, double* x, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_squares_avx2(const double* x, std::size_t n);
double sum_squared_diff_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void xpby_avx2(const double* x, double beta, double* y, std::size_t n);
void hadamard_avx2(const double* a, const double* b, double* out, std::size_t n);
void scale_avx2(double alpha, double* x, std::size_t n);
#endif
}  // namespace detail

}  // namespace splatlm::kernels
