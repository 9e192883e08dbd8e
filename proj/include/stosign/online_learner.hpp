#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stosign/dense_vector.hpp"
#include "stosign/geometry.hpp"
#include "stosign/problems.hpp"
#include "stosign/rng.hpp"
#include "stosign/run_record.hpp"
#include "stosign/sign_ops.hpp"

namespace stosign {

/// Step-size rule for the online learner: anytime eta_t = D_inf / sqrt(2t),
/// or the fixed-horizon rule eta = D_inf / sqrt(T).
struct StepSchedule {
    enum class Kind { anytime, fixed };
    Kind kind = Kind::anytime;
    std::size_t horizon = 0;

    static StepSchedule anytime() { return {}; }
    static StepSchedule fixed(std::size_t T) {
        if (T == 0) throw std::invalid_argument("StepSchedule::fixed: T must be >= 1");
        return {Kind::fixed, T};
    }
};

inline double eta(std::size_t t, double d_inf, const StepSchedule& schedule) {
    if (t == 0) throw std::invalid_argument("eta: rounds are 1-based");
    if (schedule.kind == StepSchedule::Kind::anytime) {
        return d_inf / std::sqrt(2.0 * static_cast<double>(t));
    }
    return d_inf / std::sqrt(static_cast<double>(schedule.horizon));
}

/// State of the online stochastic-sign learner: iterate (inside the box), the
/// running coordinate-wise max of past |g|, and the round counter.
struct OnlineState {
    DenseVector x;
    DenseVector max_grad; // G_t
    std::size_t round = 0;
    BoxDomain box;
    StepSchedule schedule;

    OnlineState(DenseVector x0, BoxDomain box_in, StepSchedule schedule_in)
        : x(std::move(x0)), max_grad(DenseVector::zeros(x.size())), box(std::move(box_in)),
          schedule(schedule_in) {
        if (!box.contains(x)) throw std::invalid_argument("OnlineState: x0 outside box");
    }
};

/// One round of the learner: G' = max(G, |g|), then a stochastic-sign step
/// projected back onto the box under the G'-weighted metric. |g_i| <= G'_i by
/// construction, so the strict sign-operator precondition always holds.
inline void online_step(OnlineState& state, const DenseVector& g, RngStream& rng,
                        const NoiseFn& noise = {}) {
    detail::require_same_size(state.x, g, "online_step");
    if (!g.all_finite()) throw std::invalid_argument("online_step: non-finite gradient");

    const std::size_t t = state.round + 1;
    state.max_grad = elementwise_max(state.max_grad, abs_of(g));
    const DenseVector n = noise ? noise(g.size()) : sample_uniform_sym(rng, g.size());
    const SignVector s = stochastic_sign(g, state.max_grad, n);
    const double step = eta(t, inf_diameter(state.box), state.schedule);
    state.x = project_weighted(state.x - step * s.to_dense(), state.max_grad, state.box);
    state.round = t;

    if (!state.box.contains(state.x)) throw std::logic_error("online_step: iterate left the box");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (state.max_grad[i] < std::abs(g[i])) {
            throw std::logic_error("online_step: max-buffer lost domination");
        }
    }
}

struct OnlineRunResult {
    RunRecord record;
    std::vector<DenseVector> iterates; // x_1 .. x_T as played
    DenseVector average_iterate;
    double max_regret = 0.0; // linear losses only
};

namespace detail {
inline std::vector<std::string> online_columns(std::size_t d, bool with_max_regret) {
    std::vector<std::string> cols{"t", "eta", "loss", "regret_cum"};
    if (with_max_regret) cols.push_back("regret_max_cum");
    cols.push_back("G_l1");
    if (d <= 8) {
        for (std::size_t i = 0; i < d; ++i) cols.push_back("x_" + std::to_string(i));
    }
    return cols;
}
} // namespace detail

/// Runs the learner against a pre-drawn linear adversary. Reports realized
/// losses <g_t, x_t>, running regret against the best fixed comparator in
/// hindsight (full-horizon), and the running max-regret, both analytic for
/// linear losses on a box.
inline OnlineRunResult run_online_linear(const AdversarySequence& adversary, const BoxDomain& box,
                                         const StepSchedule& schedule, DenseVector x0,
                                         RngStream& rng, const NoiseFn& noise = {}) {
    const std::size_t T = adversary.horizon();
    if (T == 0) throw std::invalid_argument("run_online_linear: empty adversary");
    const std::size_t d = box.dim();

    OnlineState state(std::move(x0), box, schedule);
    OnlineRunResult result;
    result.record = RunRecord(detail::online_columns(d, true));
    result.iterates.reserve(T);

    DenseVector grad_total(d);
    DenseVector x_sum(d);
    double learner_cum = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        const DenseVector& g = adversary.losses[t - 1];
        result.iterates.push_back(state.x);
        for (std::size_t i = 0; i < d; ++i) x_sum[i] += state.x[i];
        learner_cum += dot(g, state.x);
        for (std::size_t i = 0; i < d; ++i) grad_total[i] += g[i];

        double best_prefix = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            best_prefix += grad_total[i] * (grad_total[i] > 0.0 ? box.lo[i] : box.hi[i]);
        }
        const double step = eta(t, inf_diameter(box), schedule);
        online_step(state, g, rng, noise);

        std::vector<double> row{static_cast<double>(t), step, dot(g, result.iterates.back()),
                                0.0, learner_cum - best_prefix, norms(state.max_grad).l1};
        if (d <= 8) {
            for (std::size_t i = 0; i < d; ++i) row.push_back(result.iterates.back()[i]);
        }
        result.record.add_row(std::move(row));
    }

    // Regret against the full-horizon best fixed point, filled in per row now
    // that the comparator is known.
    DenseVector comparator(d);
    for (std::size_t i = 0; i < d; ++i) {
        comparator[i] = grad_total[i] > 0.0 ? box.lo[i] : box.hi[i];
    }
    RunRecord filled(result.record.columns());
    double cum = 0.0;
    const std::size_t loss_col = result.record.column_index("loss");
    const std::size_t regret_col = result.record.column_index("regret_cum");
    for (std::size_t t = 0; t < T; ++t) {
        auto row = result.record.rows()[t];
        cum += row[loss_col] - dot(adversary.losses[t], comparator);
        row[regret_col] = cum;
        filled.add_row(std::move(row));
    }
    result.record = std::move(filled);

    result.max_regret = best_fixed_regret(adversary, result.iterates, box);
    result.average_iterate = (1.0 / static_cast<double>(T)) * x_sum;
    result.record.set_summary("max_regret", result.max_regret);
    result.record.set_summary("regret_per_sqrt_T",
                              result.max_regret / std::sqrt(static_cast<double>(T)));
    return result;
}

/// Offline deployment on a fixed convex objective: gradients come from the
/// oracle at the played iterate; regret is reported against a user-supplied
/// comparator (the inner maximization is intractable for nonlinear losses).
inline OnlineRunResult run_online_convex(StochasticOracle& oracle, std::size_t T,
                                         const BoxDomain& box, const StepSchedule& schedule,
                                         DenseVector x0, const DenseVector& comparator,
                                         RngStream& rng, const NoiseFn& noise = {}) {
    if (T == 0) throw std::invalid_argument("run_online_convex: T must be >= 1");
    const std::size_t d = box.dim();
    const Problem& problem = oracle.base();

    OnlineState state(std::move(x0), box, schedule);
    OnlineRunResult result;
    result.record = RunRecord(detail::online_columns(d, false));
    result.iterates.reserve(T);

    DenseVector x_sum(d);
    const double comparator_value = problem.value(comparator);
    double regret_cum = 0.0;
    for (std::size_t t = 1; t <= T; ++t) {
        result.iterates.push_back(state.x);
        for (std::size_t i = 0; i < d; ++i) x_sum[i] += state.x[i];
        const double loss = problem.value(state.x);
        regret_cum += loss - comparator_value;
        const double step = eta(t, inf_diameter(box), schedule);
        const DenseVector g = oracle.gradient(state.x);
        online_step(state, g, rng, noise);

        std::vector<double> row{static_cast<double>(t), step, loss, regret_cum,
                                norms(state.max_grad).l1};
        if (d <= 8) {
            for (std::size_t i = 0; i < d; ++i) row.push_back(result.iterates.back()[i]);
        }
        result.record.add_row(std::move(row));
    }

    result.average_iterate = (1.0 / static_cast<double>(T)) * x_sum;
    result.record.set_summary("final_loss", problem.value(result.iterates.back()));
    result.record.set_summary("loss_at_average_iterate", problem.value(result.average_iterate));
    return result;
}

} // namespace stosign
