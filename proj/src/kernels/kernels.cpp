#include "ptk/kernels.hpp"

#include <stdexcept>

namespace ptk::kernels {

namespace {

Backend g_backend = detect_backend();

}  // namespace

Backend detect_backend() {
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return Backend::avx2;
#endif
    return Backend::scalar;
}

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
    if (b != Backend::scalar && detect_backend() != b)
        throw std::runtime_error("kernel backend not supported on this CPU: " +
                                 backend_name(b));
    g_backend = b;
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

double dot(std::span<const float> a, std::span<const float> b) {
#if defined(__x86_64__)
    if (g_backend == Backend::avx2) return avx2::dot(a, b);
#endif
    return scalar::dot(a, b);
}

double sum(std::span<const float> a) {
#if defined(__x86_64__)
    if (g_backend == Backend::avx2) return avx2::sum(a);
#endif
    return scalar::sum(a);
}

double sum_sq(std::span<const float> a) {
#if defined(__x86_64__)
    if (g_backend == Backend::avx2) return avx2::sum_sq(a);
#endif
    return scalar::sum_sq(a);
}

}  // namespace ptk::kernels
