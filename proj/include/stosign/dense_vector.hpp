#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace stosign {

/// Fixed-length vector of doubles. The universal carrier for iterates,
/// gradients, momenta, max-buffers and noise. Checked constructors reject
/// NaN/Inf; binary operations require equal lengths.
class DenseVector {
public:
    DenseVector() = default;

    explicit DenseVector(std::size_t d) : values_(d, 0.0) {}

    DenseVector(std::initializer_list<double> init) : values_(init) { check_finite(); }

    static DenseVector from(std::vector<double> v) {
        DenseVector out;
        out.values_ = std::move(v);
        out.check_finite();
        return out;
    }

    static DenseVector constant(std::size_t d, double value) {
        if (!std::isfinite(value)) throw std::invalid_argument("DenseVector: non-finite fill value");
        DenseVector out(d);
        std::fill(out.values_.begin(), out.values_.end(), value);
        return out;
    }

    static DenseVector zeros(std::size_t d) { return DenseVector(d); }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }
    auto begin() { return values_.begin(); }
    auto end() { return values_.end(); }

    const std::vector<double>& data() const { return values_; }

    bool operator==(const DenseVector& other) const { return values_ == other.values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(),
                           [](double v) { return std::isfinite(v); });
    }

private:
    void check_finite() const {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw std::invalid_argument("DenseVector: non-finite entry at coordinate " +
                                            std::to_string(i));
            }
        }
    }

    std::vector<double> values_;
};

namespace detail {
inline void require_same_size(const DenseVector& a, const DenseVector& b, const char* op) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(op) + ": length mismatch (" +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
}
} // namespace detail

inline DenseVector operator+(const DenseVector& a, const DenseVector& b) {
    detail::require_same_size(a, b, "operator+");
    DenseVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline DenseVector operator-(const DenseVector& a, const DenseVector& b) {
    detail::require_same_size(a, b, "operator-");
    DenseVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline DenseVector operator*(double s, const DenseVector& v) {
    DenseVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
    return out;
}

inline DenseVector hadamard(const DenseVector& a, const DenseVector& b) {
    detail::require_same_size(a, b, "hadamard");
    DenseVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

inline DenseVector abs_of(const DenseVector& v) {
    DenseVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]);
    return out;
}

/// c_i = max(a_i, b_i); the max-buffer recurrence primitive.
inline DenseVector elementwise_max(const DenseVector& a, const DenseVector& b) {
    detail::require_same_size(a, b, "elementwise_max");
    DenseVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
    return out;
}

inline double dot(const DenseVector& a, const DenseVector& b) {
    detail::require_same_size(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct Norms {
    double l1 = 0.0;
    double linf = 0.0;
    double rms = 0.0;
};

inline Norms norms(const DenseVector& v) {
    Norms out;
    if (v.empty()) return out;
    double sumsq = 0.0;
    for (double x : v) {
        const double a = std::abs(x);
        out.l1 += a;
        out.linf = std::max(out.linf, a);
        sumsq += x * x;
    }
    out.rms = std::sqrt(sumsq / static_cast<double>(v.size()));
    return out;
}

} // namespace stosign
