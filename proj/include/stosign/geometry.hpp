#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stosign/dense_vector.hpp"

namespace stosign {

/// Axis-aligned box [lo_1, hi_1] x ... x [lo_d, hi_d]. The only constraint set
/// supported: diagonal-weighted projection onto a box decomposes into per
/// coordinate clamping, exact in O(d).
struct BoxDomain {
    DenseVector lo;
    DenseVector hi;

    BoxDomain(DenseVector lo_in, DenseVector hi_in) : lo(std::move(lo_in)), hi(std::move(hi_in)) {
        detail::require_same_size(lo, hi, "BoxDomain");
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (lo[i] > hi[i]) throw std::invalid_argument("BoxDomain: lo > hi at a coordinate");
        }
    }

    /// B_inf(0, radius) in d dimensions.
    static BoxDomain symmetric(std::size_t d, double radius) {
        if (radius < 0.0) throw std::invalid_argument("BoxDomain: negative radius");
        return BoxDomain(DenseVector::constant(d, -radius), DenseVector::constant(d, radius));
    }

    /// B_inf(center, radius).
    static BoxDomain centered(const DenseVector& center, double radius) {
        if (radius < 0.0) throw std::invalid_argument("BoxDomain: negative radius");
        DenseVector l(center.size()), h(center.size());
        for (std::size_t i = 0; i < center.size(); ++i) {
            l[i] = center[i] - radius;
            h[i] = center[i] + radius;
        }
        return BoxDomain(std::move(l), std::move(h));
    }

    std::size_t dim() const { return lo.size(); }

    bool contains(const DenseVector& p, double tol = 0.0) const {
        detail::require_same_size(lo, p, "BoxDomain::contains");
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
        }
        return true;
    }
};

inline double inf_diameter(const BoxDomain& box) {
    double d = 0.0;
    for (std::size_t i = 0; i < box.dim(); ++i) d = std::max(d, box.hi[i] - box.lo[i]);
    return d;
}

/// argmin over the box of sum_i w_i (y_i - p_i)^2 for nonnegative diagonal
/// weights. Coordinate-wise this is clamp(p_i, lo_i, hi_i) independently of
/// positive weights; zero-weight coordinates are clamped as well (the limit of
/// weights -> 0+), which keeps the first projection of a run well-defined
/// while the weight buffer is still all zero.
inline DenseVector project_weighted(const DenseVector& p, const DenseVector& weights,
                                    const BoxDomain& box) {
    detail::require_same_size(p, weights, "project_weighted");
    detail::require_same_size(p, box.lo, "project_weighted");
    DenseVector out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (weights[i] < 0.0) throw std::invalid_argument("project_weighted: negative weight");
        out[i] = std::min(box.hi[i], std::max(box.lo[i], p[i]));
    }
    return out;
}

} // namespace stosign
