#pragma once

#include <cstddef>
#include <span>
#include <string>

// Data-parallel inner loops used by correlation and warping. Each kernel has
// a scalar reference implementation and, where the CPU supports it, an AVX2
// variant. The active backend is selected once at startup and can be forced
// for equivalence testing.
namespace ptk::kernels {

enum class Backend { scalar, avx2 };

// Best backend the running CPU supports.
Backend detect_backend();
Backend active_backend();
// Force a backend (throws if unsupported on this CPU). Intended for tests
// and the --no-simd flag.
void set_backend(Backend b);
std::string backend_name(Backend b);

// sum of a[i]*b[i], accumulated in double
double dot(std::span<const float> a, std::span<const float> b);
// sum of a[i]
double sum(std::span<const float> a);
// sum of a[i]^2
double sum_sq(std::span<const float> a);

namespace scalar {
double dot(std::span<const float> a, std::span<const float> b);
double sum(std::span<const float> a);
double sum_sq(std::span<const float> a);
}  // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
double dot(std::span<const float> a, std::span<const float> b);
double sum(std::span<const float> a);
double sum_sq(std::span<const float> a);
}  // namespace avx2
#endif

}  // namespace ptk::kernels
