#pragma once

#include <cstddef>
#include <string>

namespace scmppi::kernels {

// Data-parallel inner loops used by the tensor engine, the contrastive
// losses, and the skip-gram trainer. Each primitive has a scalar reference
// implementation and (on x86-64) an AVX2 variant; the active variant is
// chosen once at runtime from CPUID, overridable with SCMPPI_SIMD=scalar.
//
// Reductions accumulate in 64-bit. Elementwise kernels perform the same
// rounding sequence in every lane as the scalar reference, so scalar and
// AVX2 results are bit-identical; reductions may differ only by summation
// order (covered by the equivalence tests).

// sum_i a[i] * b[i]
double dot(const float* a, const float* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(float alpha, const float* x, float* y, std::size_t n);

// x[i] *= alpha
void scale(float alpha, float* x, std::size_t n);

// out[i] = a[i] + b[i]
void add(const float* a, const float* b, float* out, std::size_t n);

// sum_i x[i]
double sum(const float* x, std::size_t n);

// sum_i x[i]^2
double sum_sq(const float* x, std::size_t n);

// out[i] = max(x[i], 0)
void relu(const float* x, float* out, std::size_t n);

// Generic-precision fallbacks so the tensor engine can be instantiated on
// double for the finite-difference oracle. The float overloads above stay
// the dispatched fast path.
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_sq(const double* x, std::size_t n);
void relu(const double* x, double* out, std::size_t n);

// Name of the active float-kernel variant: "avx2" or "scalar".
const std::string& active_variant();

namespace detail {

// Direct entry points, exposed for the equivalence tests.
double dot_scalar(const float* a, const float* b, std::size_t n);
void axpy_scalar(float alpha, const float* x, float* y, std::size_t n);
void scale_scalar(float alpha, float* x, std::size_t n);
void add_scalar(const float* a, const float* b, float* out, std::size_t n);
double sum_scalar(const float* x, std::size_t n);
double sum_sq_scalar(const float* x, std::size_t n);
void relu_scalar(const float* x, float* out, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
#define SCMPPI_HAVE_AVX2_LANE 1
double dot_avx2(const float* a, const float* b, std::size_t n);
void axpy_avx2(float alpha, const float* x, float* y, std::size_t n);
void scale_avx2(float alpha, float* x, std::size_t n);
void add_avx2(const float* a, const float* b, float* out, std::size_t n);
double sum_avx2(const float* x, std::size_t n);
double sum_sq_avx2(const float* x, std::size_t n);
void relu_avx2(const float* x, float* out, std::size_t n);
#else
#define SCMPPI_HAVE_AVX2_LANE 0
#endif

}  // namespace detail

}  // namespace scmppi::kernels
