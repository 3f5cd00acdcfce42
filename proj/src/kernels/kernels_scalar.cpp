#include "ptk/kernels.hpp"

#include <cassert>

namespace ptk::kernels::scalar {

double dot(std::span<const float> a, std::span<const float> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

double sum(std::span<const float> a) {
    double acc = 0.0;
    for (float v : a) acc += double(v);
    return acc;
}

double sum_sq(std::span<const float> a) {
    double acc = 0.0;
    for (float v : a) acc += double(v) * double(v);
    return acc;
}

}  // namespace ptk::kernels::scalar
