#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stosign/dense_vector.hpp"
#include "stosign/geometry.hpp"
#include "stosign/problems.hpp"
#include "stosign/rng.hpp"
#include "stosign/run_record.hpp"
#include "stosign/sign_ops.hpp"

namespace stosign {

namespace detail {
// Ceil that forgives sub-1e-9 floating error on exactly-integer targets.
inline std::size_t ceil_guarded(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("schedule: non-positive block size");
    const double r = std::round(x);
    if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(x))) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(x));
}
} // namespace detail

/// Block schedule for the online-to-nonconvex drivers: K blocks of N steps,
/// increment radius D_inf, and the per-step rate rule of the chosen variant.
struct ScheduleParams {
    enum class Variant { exponential, uniform };

    std::size_t block_count = 1; // K
    std::size_t block_len = 1;   // N
    double d_inf = 0.0;
    double stationarity_delta = 1.0;
    Variant variant = Variant::exponential;
    bool relaxed = false; // user-chosen (K, N, D_inf), off the derived schedule

    std::size_t total_steps() const { return block_count * block_len; }

    /// eta_t for t >= 1; the drivers use eta_0 = 0 themselves.
    double eta(std::size_t t) const {
        if (t == 0) throw std::invalid_argument("ScheduleParams::eta: rounds are 1-based");
        if (variant == Variant::exponential) {
            const double within = static_cast<double>((t - 1) % block_len) + 1.0;
            return std::sqrt(2.0) * d_inf / std::sqrt(within);
        }
        return 2.0 * d_inf / std::sqrt(static_cast<double>(block_len));
    }
};

/// Block-length coefficients for the derived schedules. Two values are in
/// circulation: the conservative headline constant (the default) and the
/// sharper one from the underlying derivation. The coefficient is data, so
/// either is selectable.
struct ExponentialConstants {
    double n_coeff = 751.0;
    static ExponentialConstants theorem() { return {}; }
    static ExponentialConstants proof() {
        return {49.0 * (33.0 + 20.0 * std::sqrt(2.0)) / 16.0};
    }
};

struct UniformConstants {
    double n_coeff = 81.0 / 4.0;
    static UniformConstants theorem() { return {}; }
    static UniformConstants proof() { return {441.0 / 4.0}; }
};

inline ScheduleParams schedule_exponential(double delta_f, double delta, double eps, double l1,
                                           ExponentialConstants constants = {}) {
    if (!(delta_f > 0.0 && delta > 0.0 && eps > 0.0 && l1 > 0.0)) {
        throw std::invalid_argument("schedule_exponential: inputs must be positive");
    }
    ScheduleParams p;
    p.variant = ScheduleParams::Variant::exponential;
    p.block_count =
        detail::ceil_guarded(7.0 * std::sqrt(14.0) * delta_f * std::sqrt(delta) /
                             (2.0 * std::pow(eps, 1.5)));
    p.block_len = detail::ceil_guarded(constants.n_coeff * l1 * l1 / (eps * eps));
    p.d_inf = std::sqrt(eps) / (std::sqrt(14.0 * delta) * static_cast<double>(p.block_len));
    p.stationarity_delta = delta;
    return p;
}

inline ScheduleParams schedule_uniform(double delta_f, double delta, double eps, double l1,
                                       UniformConstants constants = {}) {
    if (!(delta_f > 0.0 && delta > 0.0 && eps > 0.0 && l1 > 0.0)) {
        throw std::invalid_argument("schedule_uniform: inputs must be positive");
    }
    ScheduleParams p;
    p.variant = ScheduleParams::Variant::uniform;
    p.block_count = detail::ceil_guarded(3.0 * delta_f / (eps * delta));
    p.block_len = detail::ceil_guarded(constants.n_coeff * l1 * l1 / (eps * eps));
    p.d_inf = delta / static_cast<double>(p.block_len);
    p.stationarity_delta = delta;
    return p;
}

/// Desk-scale schedule with user-chosen block structure; clearly labeled as
/// off the derived schedule.
inline ScheduleParams relaxed_schedule(ScheduleParams::Variant variant, std::size_t K,
                                       std::size_t N, double d_inf, double delta) {
    if (K == 0 || N == 0 || !(d_inf > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("relaxed_schedule: K, N >= 1 and D_inf, delta > 0 required");
    }
    ScheduleParams p;
    p.variant = variant;
    p.block_count = K;
    p.block_len = N;
    p.d_inf = d_inf;
    p.stationarity_delta = delta;
    p.relaxed = true;
    return p;
}

/// ||mean(grads)||_1 + delta * mean_n ||point_n - centroid||_inf^2, the
/// uniform-on-window realization of the (delta, eps) l1,inf stationarity
/// measure. An upper bound on the true infimum, so assertions on it are sound.
inline double stationarity_surrogate_l1inf(const std::vector<DenseVector>& window,
                                           const std::vector<DenseVector>& grads, double delta) {
    if (window.empty() || window.size() != grads.size()) {
        throw std::invalid_argument("stationarity_surrogate_l1inf: empty or misaligned window");
    }
    const std::size_t n = window.size();
    const std::size_t d = window.front().size();
    DenseVector grad_mean(d), centroid(d);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            grad_mean[i] += grads[k][i] / static_cast<double>(n);
            centroid[i] += window[k][i] / static_cast<double>(n);
        }
    }
    double spread = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dist = norms(window[k] - centroid).linf;
        spread += dist * dist / static_cast<double>(n);
    }
    return norms(grad_mean).l1 + delta * spread;
}

/// Goldstein form: ||mean(grads)||_1 with the support-feasibility flag
/// max_n ||point_n - centroid||_inf <= delta.
struct GoldsteinSurrogate {
    double value = 0.0;
    bool radius_ok = false;
};

inline GoldsteinSurrogate goldstein_surrogate(const std::vector<DenseVector>& window,
                                              const std::vector<DenseVector>& grads,
                                              double delta) {
    if (window.empty() || window.size() != grads.size()) {
        throw std::invalid_argument("goldstein_surrogate: empty or misaligned window");
    }
    const std::size_t n = window.size();
    const std::size_t d = window.front().size();
    DenseVector grad_mean(d), centroid(d);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < d; ++i) {
            grad_mean[i] += grads[k][i] / static_cast<double>(n);
            centroid[i] += window[k][i] / static_cast<double>(n);
        }
    }
    double max_dist = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        max_dist = std::max(max_dist, norms(window[k] - centroid).linf);
    }
    return {norms(grad_mean).l1, max_dist <= delta};
}

/// Per-block means of the probe points and the uniformly sampled output index.
struct BlockAverages {
    std::vector<DenseVector> mean_per_block;
    std::size_t sampled_index = 0;
    const DenseVector& sampled() const { return mean_per_block.at(sampled_index); }
};

/// Full per-step state snapshot, handed to the trace hook after the oracle
/// call of step t. `point` is x_t (exponential) or the probe w_t (uniform).
struct DriverStepTrace {
    std::size_t t;
    double scale;
    DenseVector delta;
    DenseVector x;
    DenseVector point;
    DenseVector grad;
    DenseVector max_grad;
};

struct NonconvexHooks {
    NoiseFn noise;   // sign noise override
    ScalarFn scale;  // s_t override
    std::function<void(const DriverStepTrace&)> trace;
};

struct NonconvexResult {
    BlockAverages blocks;
    RunRecord record;
    std::vector<double> surrogate_per_block;
    std::vector<bool> radius_ok_per_block; // uniform variant
    bool radius_ok_all = true;
    DenseVector final_x;
};

namespace detail {

inline std::vector<std::string> nonconvex_columns(std::size_t d) {
    std::vector<std::string> cols{"t",    "block_k",    "s_t",
                                  "loss", "G_l1",       "delta_linf",
                                  "surrogate_per_block"};
    if (d <= 8) {
        for (std::size_t i = 0; i < d; ++i) cols.push_back("x_" + std::to_string(i));
    }
    return cols;
}

inline std::size_t sample_block_index(RngStream& rng, std::size_t K) {
    const auto idx = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(K));
    return std::min(idx, K - 1);
}

} // namespace detail

/// Exponential random scaling driver. Step t reads only t-1 indexed
/// quantities: Delta_t from (G_{t-1}, eta_{t-1}, g_{t-1}), then x_t = x_{t-1}
/// + s_t Delta_t with s_t ~ Exp(1), and only then the oracle call at x_t. At
/// t = 1 the update term vanishes (eta_0 = 0, no oracle call at index 0).
inline NonconvexResult run_exponential(StochasticOracle& oracle, const DenseVector& x0,
                                       const ScheduleParams& params, RngStream& rng,
                                       const NonconvexHooks& hooks = {},
                                       DenseVector delta0 = {}) {
    const std::size_t d = x0.size();
    if (delta0.empty()) delta0 = DenseVector::zeros(d);
    if (norms(delta0).linf > params.d_inf) {
        throw std::invalid_argument("run_exponential: Delta_0 outside B_inf(0, D_inf)");
    }
    const BoxDomain ball = BoxDomain::symmetric(d, params.d_inf);
    const std::size_t K = params.block_count;
    const std::size_t N = params.block_len;
    const Problem& problem = oracle.base();

    NonconvexResult result;
    result.record = RunRecord(detail::nonconvex_columns(d));
    result.blocks.mean_per_block.reserve(K);

    DenseVector x = x0;
    DenseVector max_grad(d); // G_t
    DenseVector delta = delta0;
    DenseVector g_prev(d);
    std::vector<DenseVector> window_points, window_grads;
    window_points.reserve(N);
    window_grads.reserve(N);
    DenseVector block_sum(d);

    const std::size_t T = params.total_steps();
    for (std::size_t t = 1; t <= T; ++t) {
        if (t > 1) {
            const double eta_prev = params.eta(t - 1);
            const DenseVector n = hooks.noise ? hooks.noise(d) : sample_uniform_sym(rng, d);
            const SignVector s = stochastic_sign(g_prev, max_grad, n);
            delta = project_weighted(delta - eta_prev * s.to_dense(), max_grad, ball);
        } else {
            delta = project_weighted(delta, max_grad, ball);
        }
        const double scale = hooks.scale ? hooks.scale() : sample_exp1(rng);
        x = x + scale * delta;
        const DenseVector g = oracle.gradient(x);
        max_grad = elementwise_max(max_grad, abs_of(g));
        g_prev = g;
        if (hooks.trace) hooks.trace({t, scale, delta, x, x, g, max_grad});

        const std::size_t block = (t - 1) / N + 1;
        window_points.push_back(x);
        window_grads.push_back(problem.subgradient(x));
        for (std::size_t i = 0; i < d; ++i) block_sum[i] += x[i];

        double surrogate_cell = RunRecord::sparse;
        if (t % N == 0) {
            result.blocks.mean_per_block.push_back((1.0 / static_cast<double>(N)) * block_sum);
            const double s_val = stationarity_surrogate_l1inf(window_points, window_grads,
                                                              params.stationarity_delta);
            result.surrogate_per_block.push_back(s_val);
            surrogate_cell = s_val;
            window_points.clear();
            window_grads.clear();
            block_sum = DenseVector::zeros(d);
        }
        std::vector<double> row{static_cast<double>(t), static_cast<double>(block), scale,
                                problem.value(x),       norms(max_grad).l1, norms(delta).linf,
                                surrogate_cell};
        if (d <= 8) {
            for (std::size_t i = 0; i < d; ++i) row.push_back(x[i]);
        }
        result.record.add_row(std::move(row));
    }

    result.blocks.sampled_index = detail::sample_block_index(rng, K);
    result.final_x = x;
    result.record.set_summary("sampled_block", static_cast<double>(result.blocks.sampled_index + 1));
    result.record.set_summary("loss_at_sampled_mean", problem.value(result.blocks.sampled()));
    result.record.set_summary("surrogate_first", result.surrogate_per_block.front());
    double best = result.surrogate_per_block.front();
    for (double v : result.surrogate_per_block) best = std::min(best, v);
    result.record.set_summary("surrogate_best", best);
    return result;
}

/// Uniform random scaling driver. The gradient is queried at the probe point
/// w_t = x_{t-1} + s_t Delta_t with s_t ~ Unif[0,1]; block averages are of
/// the w_t and the Goldstein surrogate applies to each block window.
inline NonconvexResult run_uniform(StochasticOracle& oracle, const DenseVector& x0,
                                   const ScheduleParams& params, RngStream& rng,
                                   const NonconvexHooks& hooks = {}, DenseVector delta0 = {}) {
    const std::size_t d = x0.size();
    if (delta0.empty()) delta0 = DenseVector::zeros(d);
    if (norms(delta0).linf > params.d_inf) {
        throw std::invalid_argument("run_uniform: Delta_0 outside B_inf(0, D_inf)");
    }
    const BoxDomain ball = BoxDomain::symmetric(d, params.d_inf);
    const std::size_t K = params.block_count;
    const std::size_t N = params.block_len;
    const Problem& problem = oracle.base();

    NonconvexResult result;
    result.record = RunRecord(detail::nonconvex_columns(d));
    result.blocks.mean_per_block.reserve(K);

    DenseVector x = x0;
    DenseVector max_grad(d);
    DenseVector delta = delta0;
    DenseVector g_prev(d);
    std::vector<DenseVector> window_points, window_grads;
    DenseVector block_sum(d);

    const std::size_t T = params.total_steps();
    for (std::size_t t = 1; t <= T; ++t) {
        if (t > 1) {
            const double eta_prev = params.eta(t - 1);
            const DenseVector n = hooks.noise ? hooks.noise(d) : sample_uniform_sym(rng, d);
            const SignVector s = stochastic_sign(g_prev, max_grad, n);
            delta = project_weighted(delta - eta_prev * s.to_dense(), max_grad, ball);
        } else {
            delta = project_weighted(delta, max_grad, ball);
        }
        const double scale = hooks.scale ? hooks.scale() : rng.uniform01();
        const DenseVector w = x + scale * delta;
        x = x + delta;
        const DenseVector g = oracle.gradient(w);
        max_grad = elementwise_max(max_grad, abs_of(g));
        g_prev = g;
        if (hooks.trace) hooks.trace({t, scale, delta, x, w, g, max_grad});

        const std::size_t block = (t - 1) / N + 1;
        window_points.push_back(w);
        window_grads.push_back(problem.subgradient(w));
        for (std::size_t i = 0; i < d; ++i) block_sum[i] += w[i];

        double surrogate_cell = RunRecord::sparse;
        if (t % N == 0) {
            result.blocks.mean_per_block.push_back((1.0 / static_cast<double>(N)) * block_sum);
            const GoldsteinSurrogate s_val =
                goldstein_surrogate(window_points, window_grads, params.stationarity_delta);
            result.surrogate_per_block.push_back(s_val.value);
            result.radius_ok_per_block.push_back(s_val.radius_ok);
            result.radius_ok_all = result.radius_ok_all && s_val.radius_ok;
            surrogate_cell = s_val.value;
            window_points.clear();
            window_grads.clear();
            block_sum = DenseVector::zeros(d);
        }
        std::vector<double> row{static_cast<double>(t), static_cast<double>(block), scale,
                                problem.value(w),       norms(max_grad).l1, norms(delta).linf,
                                surrogate_cell};
        if (d <= 8) {
            for (std::size_t i = 0; i < d; ++i) row.push_back(w[i]);
        }
        result.record.add_row(std::move(row));
    }

    result.blocks.sampled_index = detail::sample_block_index(rng, K);
    result.final_x = x;
    result.record.set_summary("sampled_block", static_cast<double>(result.blocks.sampled_index + 1));
    result.record.set_summary("loss_at_sampled_mean", problem.value(result.blocks.sampled()));
    result.record.set_summary("surrogate_first", result.surrogate_per_block.front());
    double best = result.surrogate_per_block.front();
    for (double v : result.surrogate_per_block) best = std::min(best, v);
    result.record.set_summary("surrogate_best", best);
    result.record.set_summary("radius_ok_all", result.radius_ok_all ? 1.0 : 0.0);
    return result;
}

} // namespace stosign
