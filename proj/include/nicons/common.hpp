#pragma once

// Shared scalar/vector aliases and small numeric helpers used across the
// library. Everything is desk-scale: plain std::vector<double> throughout.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nicons {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

/// Time-dependent input signal u(t).
using InputSignal = std::function<Vec(double)>;

inline double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline bool all_finite(const Vec& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

/// Copy the block [offset, offset+len) out of a stacked vector.
inline Vec block(const Vec& v, std::size_t offset, std::size_t len) {
    if (offset + len > v.size()) throw std::out_of_range("block: slice exceeds vector size");
    return Vec(v.begin() + static_cast<std::ptrdiff_t>(offset),
               v.begin() + static_cast<std::ptrdiff_t>(offset + len));
}

inline void append(Vec& dst, const Vec& src) { dst.insert(dst.end(), src.begin(), src.end()); }

/// Deterministic uniform sampler. Draws are mapped from the raw mt19937_64
/// stream so sequences are identical across standard library implementations.
class UniformSampler {
public:
    explicit UniformSampler(std::uint64_t seed) : rng_(seed) {}

    /// Uniform draw in [0, 1).
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    /// Uniform draw in [lo, hi).
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 rng_;
};

}  // namespace nicons
