#include "climsid/kernels.hpp"

#include <cmath>

namespace climsid::kernels {

namespace scalar {

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sumsq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double max_val(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] > m) m = x[i];
    return m;
}

double min_val(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] < m) m = x[i];
    return m;
}

double max_abs(const double* x, std::size_t n) {
    double m = std::fabs(x[0]);
    for (std::size_t i = 1; i < n; ++i) {
        const double a = std::fabs(x[i]);
        if (a > m) m = a;
    }
    return m;
}

double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

double sum_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] - b[i];
    return acc;
}

double sumsq_diff(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scalar(const double* x, double c, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + c;
}

} // namespace scalar

namespace {

struct Vtable {
    double (*sum)(const double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*max_val)(const double*, std::size_t);
    double (*min_val)(const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    double (*sum_abs_diff)(const double*, const double*, std::size_t);
    double (*sum_diff)(const double*, const double*, std::size_t);
    double (*sumsq_diff)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*add_scalar)(const double*, double, double*, std::size_t);
};

constexpr Vtable kScalar = {
    scalar::sum,     scalar::sumsq,        scalar::dot,      scalar::max_val,
    scalar::min_val, scalar::max_abs,      scalar::sum_abs_diff,
    scalar::sum_diff, scalar::sumsq_diff,  scalar::axpy,     scalar::add_scalar,
};

#if defined(CLIMSID_HAVE_AVX2_TU)
constexpr Vtable kAvx2 = {
    avx2::sum,     avx2::sumsq,        avx2::dot,      avx2::max_val,
    avx2::min_val, avx2::max_abs,      avx2::sum_abs_diff,
    avx2::sum_diff, avx2::sumsq_diff,  avx2::axpy,     avx2::add_scalar,
};
#endif

bool cpu_has_avx2() {
#if defined(CLIMSID_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Vtable* g_active = nullptr;
Backend g_backend = Backend::Scalar;

const Vtable* probe() {
#if defined(CLIMSID_HAVE_AVX2_TU)
    if (cpu_has_avx2()) {
        g_backend = Backend::Avx2;
        return &kAvx2;
    }
#endif
    g_backend = Backend::Scalar;
    return &kScalar;
}

const Vtable& table() {
    if (!g_active) g_active = probe();
    return *g_active;
}

} // namespace

Backend set_backend(Backend b) {
    switch (b) {
        case Backend::Auto:
            g_active = probe();
            break;
        case Backend::Scalar:
            g_active = &kScalar;
            g_backend = Backend::Scalar;
            break;
        case Backend::Avx2:
#if defined(CLIMSID_HAVE_AVX2_TU)
            if (cpu_has_avx2()) {
                g_active = &kAvx2;
                g_backend = Backend::Avx2;
                break;
            }
#endif
            g_active = &kScalar;
            g_backend = Backend::Scalar;
            break;
    }
    return g_backend;
}

Backend active_backend() {
    table();
    return g_backend;
}

const char* backend_name() {
    return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

double sum(const double* x, std::size_t n) { return table().sum(x, n); }
double sumsq(const double* x, std::size_t n) { return table().sumsq(x, n); }
double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }
double max_val(const double* x, std::size_t n) { return table().max_val(x, n); }
double min_val(const double* x, std::size_t n) { return table().min_val(x, n); }
double max_abs(const double* x, std::size_t n) { return table().max_abs(x, n); }
double sum_abs_diff(const double* a, const double* b, std::size_t n) {
    return table().sum_abs_diff(a, b, n);
}
double sum_diff(const double* a, const double* b, std::size_t n) {
    return table().sum_diff(a, b, n);
}
double sumsq_diff(const double* a, const double* b, std::size_t n) {
    return table().sumsq_diff(a, b, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }
void add_scalar(const double* x, double c, double* y, std::size_t n) {
    table().add_scalar(x, c, y, n);
}

} // namespace climsid::kernels
