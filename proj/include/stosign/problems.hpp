#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stosign/dense_vector.hpp"
#include "stosign/geometry.hpp"
#include "stosign/rng.hpp"
#include "stosign/sign_ops.hpp"

namespace stosign {

/// Objective with value and (sub)gradient access plus declared per-coordinate
/// Lipschitz bounds L_i on the gradient stream.
struct Problem {
    std::string id;
    std::size_t dim = 0;
    std::function<double(const DenseVector&)> value;
    std::function<DenseVector(const DenseVector&)> subgradient;
    DenseVector lipschitz_L;
    std::optional<double> lower_bound; // f*, where known
};

/// f(x1, x2) = |x1 + x2| + 2|x1 - x2|. Convex, non-smooth, minimized at the
/// origin; subgradient selection uses sign(0) := 0 at the kinks. Deterministic
/// sign descent from a point with x1 + x2 = 1 and x1 != x2 moves along
/// +-(1, -1) and never leaves the line x1 + x2 = 1.
inline Problem fig1_objective() {
    Problem p;
    p.id = "fig1";
    p.dim = 2;
    p.value = [](const DenseVector& x) {
        return std::abs(x[0] + x[1]) + 2.0 * std::abs(x[0] - x[1]);
    };
    p.subgradient = [](const DenseVector& x) {
        const double s = scalar_sign(x[0] + x[1]);
        const double r = scalar_sign(x[0] - x[1]);
        return DenseVector{s + 2.0 * r, s - 2.0 * r};
    };
    p.lipschitz_L = DenseVector{3.0, 3.0};
    p.lower_bound = 0.0;
    return p;
}

/// f(x) = sum_i |x_i| / (1 + |x_i|). Bounded below by 0, non-convex,
/// differentiable away from the axes, coordinate-Lipschitz with L_i = 1.
inline Problem toy_nonconvex(std::size_t d) {
    if (d == 0) throw std::invalid_argument("toy_nonconvex: d must be >= 1");
    Problem p;
    p.id = "toy-nonconvex";
    p.dim = d;
    p.value = [](const DenseVector& x) {
        double acc = 0.0;
        for (double xi : x) acc += std::abs(xi) / (1.0 + std::abs(xi));
        return acc;
    };
    p.subgradient = [](const DenseVector& x) {
        DenseVector g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double a = 1.0 + std::abs(x[i]);
            g[i] = static_cast<double>(scalar_sign(x[i])) / (a * a);
        }
        return g;
    };
    p.lipschitz_L = DenseVector::constant(d, 1.0);
    p.lower_bound = 0.0;
    return p;
}

/// First-order oracle wrapping a Problem with optional mean-zero bounded
/// noise: g = subgradient(x) + amplitude (.) Unif[-1,1]^d. The effective
/// coordinate bound is L_i = clean L_i + amplitude_i. Owns its stream; one
/// run at a time.
class StochasticOracle {
public:
    enum class Noise { none, bounded_uniform };

    StochasticOracle(Problem base, RngStream rng)
        : StochasticOracle(std::move(base), Noise::none,
                           DenseVector::zeros(0), std::move(rng)) {}

    StochasticOracle(Problem base, Noise model, DenseVector amplitude, RngStream rng)
        : base_(std::move(base)), model_(model), amplitude_(std::move(amplitude)),
          rng_(std::move(rng)) {
        if (model_ == Noise::bounded_uniform && amplitude_.size() != base_.dim) {
            throw std::invalid_argument("StochasticOracle: amplitude dimension mismatch");
        }
        for (double a : amplitude_) {
            if (a < 0.0) throw std::invalid_argument("StochasticOracle: negative amplitude");
        }
    }

    DenseVector gradient(const DenseVector& x) {
        DenseVector g = base_.subgradient(x);
        if (model_ == Noise::bounded_uniform) {
            const DenseVector n = sample_uniform_sym(rng_, g.size());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += amplitude_[i] * n[i];
        }
        return g;
    }

    DenseVector effective_L() const {
        if (model_ == Noise::none) return base_.lipschitz_L;
        DenseVector L(base_.dim);
        for (std::size_t i = 0; i < base_.dim; ++i) L[i] = base_.lipschitz_L[i] + amplitude_[i];
        return L;
    }

    const Problem& base() const { return base_; }

private:
    Problem base_;
    Noise model_;
    DenseVector amplitude_;
    RngStream rng_;
};

/// Pre-drawn sequence of linear loss vectors with |g_{t,i}| <= L_i.
struct AdversarySequence {
    std::vector<DenseVector> losses;
    std::size_t horizon() const { return losses.size(); }
};

/// g_{t,i} = L_i * eps_{t,i} with i.i.d. Rademacher signs: the separable
/// hard-instance scheme behind the regret lower bound.
inline AdversarySequence rademacher_adversary(RngStream& rng, std::size_t T, std::size_t d,
                                              const DenseVector& L) {
    if (T == 0) throw std::invalid_argument("rademacher_adversary: T must be >= 1");
    if (L.size() != d) throw std::invalid_argument("rademacher_adversary: L dimension mismatch");
    AdversarySequence seq;
    seq.losses.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        seq.losses.push_back(hadamard(L, sample_rademacher(rng, d)));
    }
    return seq;
}

/// max over x in the box of sum_t <g_t, x_t - x>. For linear losses on a box
/// the inner minimizer is per-coordinate: lo_i if (sum g)_i > 0 else hi_i.
inline double best_fixed_regret(const AdversarySequence& seq,
                                const std::vector<DenseVector>& iterates, const BoxDomain& box) {
    if (iterates.size() != seq.horizon()) {
        throw std::invalid_argument("best_fixed_regret: iterates length != horizon");
    }
    const std::size_t d = box.dim();
    DenseVector total(d);
    double learner = 0.0;
    for (std::size_t t = 0; t < seq.horizon(); ++t) {
        learner += dot(seq.losses[t], iterates[t]);
        for (std::size_t i = 0; i < d; ++i) total[i] += seq.losses[t][i];
    }
    double best = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        best += total[i] * (total[i] > 0.0 ? box.lo[i] : box.hi[i]);
    }
    return learner - best;
}

inline Problem problem_by_id(const std::string& id, std::size_t d) {
    if (id == "fig1") return fig1_objective();
    if (id == "toy-nonconvex") return toy_nonconvex(d);
    throw std::invalid_argument("unknown problem id: " + id);
}

} // namespace stosign
