#include "scmppi/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>

namespace scmppi::kernels {

namespace detail {

double dot_scalar(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return acc;
}

void axpy_scalar(float alpha, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(float alpha, float* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void add_scalar(const float* a, const float* b, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

double sum_scalar(const float* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(x[i]);
    return acc;
}

double sum_sq_scalar(const float* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(x[i]) * static_cast<double>(x[i]);
    }
    return acc;
}

void relu_scalar(const float* x, float* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

}  // namespace detail

namespace {

struct Dispatch {
    double (*dot)(const float*, const float*, std::size_t);
    void (*axpy)(float, const float*, float*, std::size_t);
    void (*scale)(float, float*, std::size_t);
    void (*add)(const float*, const float*, float*, std::size_t);
    double (*sum)(const float*, std::size_t);
    double (*sum_sq)(const float*, std::size_t);
    void (*relu)(const float*, float*, std::size_t);
    std::string name;
};

Dispatch select() {
    Dispatch d{detail::dot_scalar, detail::axpy_scalar, detail::scale_scalar,
               detail::add_scalar, detail::sum_scalar, detail::sum_sq_scalar,
               detail::relu_scalar, "scalar"};
    const char* forced = std::getenv("SCMPPI_SIMD");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return d;
#if SCMPPI_HAVE_AVX2_LANE
    const bool want_avx2 = forced == nullptr || std::strcmp(forced, "avx2") == 0;
    if (want_avx2 && __builtin_cpu_supports("avx2")) {
        d = Dispatch{detail::dot_avx2,  detail::axpy_avx2,   detail::scale_avx2,
                     detail::add_avx2,  detail::sum_avx2,    detail::sum_sq_avx2,
                     detail::relu_avx2, "avx2"};
    }
#endif
    return d;
}

const Dispatch& dispatch() {
    static const Dispatch d = select();
    return d;
}

}  // namespace

double dot(const float* a, const float* b, std::size_t n) { return dispatch().dot(a, b, n); }
void axpy(float alpha, const float* x, float* y, std::size_t n) { dispatch().axpy(alpha, x, y, n); }
void scale(float alpha, float* x, std::size_t n) { dispatch().scale(alpha, x, n); }
void add(const float* a, const float* b, float* out, std::size_t n) { dispatch().add(a, b, out, n); }
double sum(const float* x, std::size_t n) { return dispatch().sum(x, n); }
double sum_sq(const float* x, std::size_t n) { return dispatch().sum_sq(x, n); }
void relu(const float* x, float* out, std::size_t n) { dispatch().relu(x, out, n); }

const std::string& active_variant() { return dispatch().name; }

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double sum_sq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void relu(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace scmppi::kernels
