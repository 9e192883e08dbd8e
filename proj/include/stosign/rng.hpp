#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "stosign/dense_vector.hpp"

namespace stosign {

/// Counter-based stream generator in the SplitMix64 family. Each draw hashes
/// (key, counter), so a stream is a pure function of (seed, stream_id):
/// identical inputs reproduce the sequence bit-for-bit, and distinct
/// stream_ids give statistically independent streams. One stream per
/// optimizer instance / experiment seed; no state is shared.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : key_(derive_key(seed, stream_id)) {}

    std::uint64_t next_u64() {
        counter_ += UINT64_C(0x9E3779B97F4A7C15);
        return mix(key_ + counter_);
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1]; a raw 0 maps to the smallest grid value 2^-53.
    double uniform01_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [-1, 1].
    double uniform_sym() { return 2.0 * uniform01() - 1.0; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
        return z ^ (z >> 31);
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream_id) {
        const std::uint64_t a = mix(seed + UINT64_C(0x9E3779B97F4A7C15));
        const std::uint64_t b = mix(stream_id + UINT64_C(0xC2B2AE3D27D4EB4F));
        return mix(a ^ (b + UINT64_C(0x165667B19E3779F9)));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Inverse-CDF map for Exp(1); u must lie in (0, 1]. u = 1 gives exactly 0.
inline double exp1_from_uniform(double u) {
    if (!(u > 0.0) || u > 1.0) throw std::invalid_argument("exp1_from_uniform: u outside (0,1]");
    return -std::log(u);
}

/// One draw from Exp(1).
inline double sample_exp1(RngStream& rng) { return exp1_from_uniform(rng.uniform01_open()); }

/// d independent coordinates, each Unif[-1, 1].
inline DenseVector sample_uniform_sym(RngStream& rng, std::size_t d) {
    if (d == 0) throw std::invalid_argument("sample_uniform_sym: d must be >= 1");
    DenseVector out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = rng.uniform_sym();
    return out;
}

/// d independent coordinates, each +-1 with probability 1/2.
inline DenseVector sample_rademacher(RngStream& rng, std::size_t d) {
    if (d == 0) throw std::invalid_argument("sample_rademacher: d must be >= 1");
    DenseVector out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    return out;
}

/// Supplies the Unif[-1,1]^d vectors consumed by sign-noise updates. Tests
/// substitute zero or recorded noise through this hook; an empty function
/// means "draw from the stream".
using NoiseFn = std::function<DenseVector(std::size_t)>;

inline NoiseFn zero_noise() {
    return [](std::size_t d) { return DenseVector::zeros(d); };
}

/// Scalar draw hook for the random step scalings s_t.
using ScalarFn = std::function<double()>;

} // namespace stosign
