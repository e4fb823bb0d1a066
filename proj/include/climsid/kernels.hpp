#pragma once

#include <cstddef>

// Data-parallel primitives behind the signal statistics and comparison metrics.
// Scalar reference implementations always exist; on x86-64 an AVX2/FMA variant of each
// is selected at runtime when the CPU supports it. Variants must agree with the scalar
// reference to tight tolerance (exactly, for max/min); the unit tests enforce that.
namespace climsid::kernels {

enum class Backend { Auto, Scalar, Avx2 };

// Force a backend (tests, benchmarking). Auto re-probes the CPU. Returns the backend
// actually active after the call; asking for Avx2 on a CPU without it keeps Scalar.
Backend set_backend(Backend b);
Backend active_backend();
const char* backend_name();

double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double max_val(const double* x, std::size_t n);   // n >= 1
double min_val(const double* x, std::size_t n);   // n >= 1
double max_abs(const double* x, std::size_t n);   // n >= 1

// Mean absolute / signed difference of paired arrays, and sum of squared differences.
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_diff(const double* a, const double* b, std::size_t n);
double sumsq_diff(const double* a, const double* b, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// y[i] = x[i] + c
void add_scalar(const double* x, double c, double* y, std::size_t n);

// Scalar reference implementations, exposed for equivalence testing.
namespace scalar {
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double max_val(const double* x, std::size_t n);
double min_val(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_diff(const double* a, const double* b, std::size_t n);
double sumsq_diff(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void add_scalar(const double* x, double c, double* y, std::size_t n);
} // namespace scalar

#if defined(CLIMSID_HAVE_AVX2_TU)
namespace avx2 {
double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double max_val(const double* x, std::size_t n);
double min_val(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
double sum_diff(const double* a, const double* b, std::size_t n);
double sumsq_diff(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void add_scalar(const double* x, double c, double* y, std::size_t n);
} // namespace avx2
#endif

} // namespace climsid::kernels
