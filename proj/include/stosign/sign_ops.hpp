#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosign/dense_vector.hpp"
#include "stosign/rng.hpp"

namespace stosign {

/// Vector over {-1, 0, +1}.
class SignVector {
public:
    SignVector() = default;
    explicit SignVector(std::size_t d) : values_(d, 0) {}

    std::size_t size() const { return values_.size(); }

    int operator[](std::size_t i) const { return values_[i]; }

    void set(std::size_t i, int v) {
        if (v < -1 || v > 1) throw std::invalid_argument("SignVector: entry outside {-1,0,+1}");
        values_[i] = static_cast<std::int8_t>(v);
    }

    DenseVector to_dense() const {
        DenseVector out(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) out[i] = static_cast<double>(values_[i]);
        return out;
    }

    bool operator==(const SignVector& other) const { return values_ == other.values_; }

private:
    std::vector<std::int8_t> values_;
};

inline int scalar_sign(double x) { return (x > 0.0) - (x < 0.0); }

/// Deterministic coordinate-wise sign with sign(0) := 0.
inline SignVector det_sign(const DenseVector& x) {
    SignVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out.set(i, scalar_sign(x[i]));
    return out;
}

/// Stochastic sign with explicitly supplied noise: s_i = sign(x_i + G_i * n_i).
/// Requires |x_i| <= G_i; callers whose numerator can exceed the scale must go
/// through the saturating conversion step in practical_optimizers instead.
inline SignVector stochastic_sign(const DenseVector& x, const DenseVector& scale,
                                  const DenseVector& noise) {
    detail::require_same_size(x, scale, "stochastic_sign");
    detail::require_same_size(x, noise, "stochastic_sign");
    SignVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (scale[i] < 0.0 || std::abs(x[i]) > scale[i]) {
            throw std::invalid_argument("stochastic_sign: |x| <= G violated at coordinate " +
                                        std::to_string(i));
        }
        out.set(i, scalar_sign(x[i] + scale[i] * noise[i]));
    }
    return out;
}

inline SignVector stochastic_sign(const DenseVector& x, const DenseVector& scale, RngStream& rng) {
    return stochastic_sign(x, scale, sample_uniform_sym(rng, x.size()));
}

/// Closed-form law of the stochastic sign: P(+1) = (G+x)/(2G), P(-1) = (G-x)/(2G),
/// mean = x/G and variance = 1 - (x/G)^2. Degenerate coordinates (G_i = 0 forces
/// x_i = 0) carry the whole mass at 0.
struct SignLaw {
    DenseVector p_plus;
    DenseVector p_minus;
    DenseVector mean;
    DenseVector variance;
};

inline SignLaw sign_law(const DenseVector& x, const DenseVector& scale) {
    detail::require_same_size(x, scale, "sign_law");
    const std::size_t d = x.size();
    SignLaw law{DenseVector(d), DenseVector(d), DenseVector(d), DenseVector(d)};
    for (std::size_t i = 0; i < d; ++i) {
        if (scale[i] < 0.0 || std::abs(x[i]) > scale[i]) {
            throw std::invalid_argument("sign_law: |x| <= G violated at coordinate " +
                                        std::to_string(i));
        }
        if (scale[i] == 0.0) continue; // all-zero row: mass at s = 0
        const double r = x[i] / scale[i];
        law.p_plus[i] = (scale[i] + x[i]) / (2.0 * scale[i]);
        law.p_minus[i] = (scale[i] - x[i]) / (2.0 * scale[i]);
        law.mean[i] = r;
        law.variance[i] = 1.0 - r * r;
    }
    return law;
}

/// Signal-to-noise diagnostics of a sign-converted update with numerator m and
/// scale sigma. The ratio r = m/sigma is clamped to [-1,1] (saturated
/// coordinates flip deterministically) and defined as 0 where both vanish.
struct SnrMetrics {
    double rms_of_ratio = 0.0;
    double total_variance = 0.0;                   // d * (1 - ||r||_RMS^2)
    std::array<double, 9> abs_ratio_quantiles{};   // |r| at q = 0.1 .. 0.9
};

inline SnrMetrics snr_metrics(const DenseVector& m, const DenseVector& sigma) {
    detail::require_same_size(m, sigma, "snr_metrics");
    const std::size_t d = m.size();
    SnrMetrics out;
    if (d == 0) return out;

    std::vector<double> abs_ratio(d);
    double sumsq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (sigma[i] < 0.0) throw std::invalid_argument("snr_metrics: sigma must be >= 0");
        double r = 0.0;
        if (sigma[i] == 0.0) {
            r = (m[i] == 0.0) ? 0.0 : static_cast<double>(scalar_sign(m[i]));
        } else {
            r = std::clamp(m[i] / sigma[i], -1.0, 1.0);
        }
        abs_ratio[i] = std::abs(r);
        sumsq += r * r;
    }
    const double rms2 = sumsq / static_cast<double>(d);
    out.rms_of_ratio = std::sqrt(rms2);
    out.total_variance = static_cast<double>(d) * (1.0 - rms2);

    std::sort(abs_ratio.begin(), abs_ratio.end());
    for (int q = 1; q <= 9; ++q) {
        const double pos = 0.1 * q * static_cast<double>(d - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, d - 1);
        const double frac = pos - static_cast<double>(lo);
        out.abs_ratio_quantiles[static_cast<std::size_t>(q - 1)] =
            abs_ratio[lo] + frac * (abs_ratio[hi] - abs_ratio[lo]);
    }
    return out;
}

} // namespace stosign
