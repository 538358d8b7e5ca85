#include "splatlm/kernels/vec_kernels.hpp"

#include <atomic>

namespace splatlm::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double sum_squared_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby_scalar(const double* x, double beta, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace detail

namespace {

struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_squares)(const double*, std::size_t);
    double (*sum_squared_diff)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*xpby)(const double*, double, double*, std::size_t);
    void (*hadamard)(const double*, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
};

constexpr Ops kScalarOps{detail::dot_scalar,          detail::sum_squares_scalar,
                         detail::sum_squared_diff_scalar,
                         detail::axpy_scalar,         detail::xpby_scalar,
                         detail::hadamard_scalar,     detail::scale_scalar};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops{detail::dot_avx2,          detail::sum_squares_avx2,
                       detail::sum_squared_diff_avx2,
                       detail::axpy_avx2,         detail::xpby_avx2,
                       detail::hadamard_avx2,     detail::scale_avx2};
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Backend> g_backend{cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar};

const Ops& ops_for(Backend b) {
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::kAvx2) return kAvx2Ops;
#endif
    (void)b;
    return kScalarOps;
}

const Ops& ops() { return ops_for(g_backend.load(std::memory_order_relaxed)); }

}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

bool backend_supported(Backend b) {
    if (b == Backend::kScalar) return true;
    return cpu_has_avx2();
}

bool set_backend(Backend b) {
    if (!backend_supported(b)) return false;
    g_backend.store(b, std::memory_order_relaxed);
    return true;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::kScalar: return "scalar";
        case Backend::kAvx2: return "avx2";
    }
    return "unknown";
}

double dot(const double* a, const double* b, std::size_t n) { return ops().dot(a, b, n); }
double sum_squares(const double* x, std::size_t n) { return ops().sum_squares(x, n); }
double sum_squared_diff(const double* a, const double* b, std::size_t n) {
    return ops().sum_squared_diff(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) { ops().axpy(alpha, x, y, n); }
void xpby(const double* x, double beta, double* y, std::size_t n) { ops().xpby(x, beta, y, n); }
void hadamard(const double* a, const double* b, double* out, std::size_t n) {
    ops().hadamard(a, b, out, n);
}
void scale(double alpha, double* x, std::size_t n) { ops().scale(alpha, x, n); }

}  // namespace splatlm::kernels
