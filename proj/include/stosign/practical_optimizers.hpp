#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "stosign/dense_vector.hpp"
#include "stosign/problems.hpp"
#include "stosign/rng.hpp"
#include "stosign/run_record.hpp"
#include "stosign/sign_ops.hpp"

namespace stosign {

enum class OptimizerId {
    stosignsgd,
    stosignsgd_v2,
    signsgd,
    adamw,
    adamax,
    sign_adamw,
    sign_adamax,
    ie_stosignsgd,
};

inline std::string to_string(OptimizerId id) {
    switch (id) {
        case OptimizerId::stosignsgd: return "stosignsgd";
        case OptimizerId::stosignsgd_v2: return "stosignsgd-v2";
        case OptimizerId::signsgd: return "signsgd";
        case OptimizerId::adamw: return "adamw";
        case OptimizerId::adamax: return "adamax";
        case OptimizerId::sign_adamw: return "sign-adamw";
        case OptimizerId::sign_adamax: return "sign-adamax";
        case OptimizerId::ie_stosignsgd: return "ie-stosignsgd";
    }
    throw std::logic_error("to_string: bad OptimizerId");
}

inline OptimizerId optimizer_from_id(std::string_view name) {
    if (name == "stosignsgd") return OptimizerId::stosignsgd;
    if (name == "stosignsgd-v2") return OptimizerId::stosignsgd_v2;
    if (name == "signsgd") return OptimizerId::signsgd;
    if (name == "adamw") return OptimizerId::adamw;
    if (name == "adamax") return OptimizerId::adamax;
    if (name == "sign-adamw") return OptimizerId::sign_adamw;
    if (name == "sign-adamax") return OptimizerId::sign_adamax;
    if (name == "ie-stosignsgd") return OptimizerId::ie_stosignsgd;
    throw std::invalid_argument("unknown optimizer id: " + std::string(name));
}

struct OptimizerHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

inline OptimizerHyper default_hyper(OptimizerId id) {
    OptimizerHyper h;
    if (id == OptimizerId::stosignsgd_v2) h.beta2 = 0.99995;
    return h;
}

/// Optimizer state: iterate, EMA momentum, and the algorithm's preconditioner
/// buffer (max-buffer G, second moment v, or AdaMax buffer u).
struct PracticalState {
    OptimizerId algo;
    DenseVector x;
    DenseVector momentum;
    DenseVector precond;
    std::size_t step_count = 0;
    OptimizerHyper hyper;
};

inline PracticalState make_state(OptimizerId algo, DenseVector x0, OptimizerHyper hyper) {
    const std::size_t d = x0.size();
    return PracticalState{algo, std::move(x0), DenseVector::zeros(d), DenseVector::zeros(d), 0,
                          hyper};
}

inline PracticalState make_state(OptimizerId algo, DenseVector x0) {
    return make_state(algo, std::move(x0), default_hyper(algo));
}

/// Saturating sign-conversion update direction: sign(numerator + sigma (.) n).
/// Unlike the strict stochastic sign operator this admits |numerator| > sigma,
/// where the noise cannot flip the sign and the step is deterministic.
inline SignVector sign_conversion_step(const DenseVector& numerator, const DenseVector& sigma,
                                       const DenseVector& noise) {
    detail::require_same_size(numerator, sigma, "sign_conversion_step");
    detail::require_same_size(numerator, noise, "sign_conversion_step");
    SignVector out(numerator.size());
    for (std::size_t i = 0; i < numerator.size(); ++i) {
        if (sigma[i] < 0.0) throw std::invalid_argument("sign_conversion_step: sigma must be >= 0");
        out.set(i, scalar_sign(numerator[i] + sigma[i] * noise[i]));
    }
    return out;
}

/// Diagnostics handed back by one step: the update numerator (m or bias
/// corrected m-hat), its scale sigma (empty when the algorithm has none), and
/// the realized update direction before learning rate and decay.
struct StepDiag {
    DenseVector numerator;
    DenseVector sigma;
    DenseVector direction;
};

namespace detail {

inline bool uses_raw_momentum_init(OptimizerId id) {
    switch (id) {
        case OptimizerId::stosignsgd:
        case OptimizerId::stosignsgd_v2:
        case OptimizerId::signsgd:
        case OptimizerId::ie_stosignsgd:
            return true;
        default:
            return false;
    }
}

inline bool is_max_buffer_family(OptimizerId id) {
    return id == OptimizerId::stosignsgd || id == OptimizerId::stosignsgd_v2 ||
           id == OptimizerId::ie_stosignsgd;
}

} // namespace detail

/// Advances the state by one update with step size lr. Sign-converted
/// optimizers consume one Unif[-1,1]^d noise vector per step, either from rng
/// or from the noise hook; the other algorithms touch neither.
inline StepDiag practical_step(PracticalState& state, const DenseVector& g, double lr,
                               RngStream* rng = nullptr, const NoiseFn& noise = {}) {
    detail::require_same_size(state.x, g, "practical_step");
    if (!g.all_finite()) throw std::invalid_argument("practical_step: non-finite gradient");
    const std::size_t d = g.size();
    const OptimizerHyper& h = state.hyper;
    const std::size_t t = state.step_count + 1;
    const auto draw_noise = [&]() -> DenseVector {
        if (noise) return noise(d);
        if (rng) return sample_uniform_sym(*rng, d);
        throw std::invalid_argument("practical_step: sign-converted optimizer needs rng or hook");
    };

    // Momentum recurrence. The sign-family algorithms start from m_1 = g_1;
    // the Adam family starts from m_0 = 0 and bias-corrects.
    if (detail::uses_raw_momentum_init(state.algo) && t == 1) {
        state.momentum = g;
    } else {
        DenseVector m(d);
        for (std::size_t i = 0; i < d; ++i) m[i] = h.beta1 * state.momentum[i] + (1.0 - h.beta1) * g[i];
        state.momentum = std::move(m);
    }

    StepDiag diag;
    switch (state.algo) {
        case OptimizerId::signsgd: {
            diag.numerator = state.momentum;
            diag.direction = det_sign(state.momentum).to_dense();
            break;
        }
        case OptimizerId::stosignsgd:
        case OptimizerId::stosignsgd_v2:
        case OptimizerId::ie_stosignsgd: {
            const double damp = state.algo == OptimizerId::stosignsgd ? 1.0 : h.beta2;
            DenseVector buf(d);
            for (std::size_t i = 0; i < d; ++i) {
                buf[i] = std::max(damp * state.precond[i], std::abs(state.momentum[i]));
            }
            state.precond = std::move(buf);
            diag.numerator = state.momentum;
            diag.sigma = state.precond;
            if (state.algo == OptimizerId::ie_stosignsgd) {
                DenseVector dir(d);
                for (std::size_t i = 0; i < d; ++i) {
                    dir[i] = state.precond[i] == 0.0 ? 0.0 : state.momentum[i] / state.precond[i];
                }
                diag.direction = std::move(dir);
            } else {
                diag.direction =
                    sign_conversion_step(diag.numerator, diag.sigma, draw_noise()).to_dense();
            }
            break;
        }
        case OptimizerId::adamw:
        case OptimizerId::sign_adamw: {
            DenseVector v(d);
            for (std::size_t i = 0; i < d; ++i) {
                v[i] = h.beta2 * state.precond[i] + (1.0 - h.beta2) * g[i] * g[i];
            }
            state.precond = std::move(v);
            const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
            const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
            DenseVector numer(d), sigma(d);
            for (std::size_t i = 0; i < d; ++i) {
                numer[i] = state.momentum[i] / bc1;
                sigma[i] = std::sqrt(state.precond[i] / bc2) + h.eps;
            }
            diag.numerator = std::move(numer);
            diag.sigma = std::move(sigma);
            if (state.algo == OptimizerId::adamw) {
                DenseVector dir(d);
                for (std::size_t i = 0; i < d; ++i) dir[i] = diag.numerator[i] / diag.sigma[i];
                diag.direction = std::move(dir);
            } else {
                diag.direction =
                    sign_conversion_step(diag.numerator, diag.sigma, draw_noise()).to_dense();
            }
            break;
        }
        case OptimizerId::adamax:
        case OptimizerId::sign_adamax: {
            DenseVector u(d);
            for (std::size_t i = 0; i < d; ++i) {
                u[i] = std::max(h.beta2 * state.precond[i], std::abs(g[i]));
            }
            state.precond = std::move(u);
            const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
            DenseVector numer(d), sigma(d);
            for (std::size_t i = 0; i < d; ++i) {
                numer[i] = state.momentum[i] / bc1;
                sigma[i] = state.precond[i] + h.eps;
            }
            diag.numerator = std::move(numer);
            diag.sigma = std::move(sigma);
            if (state.algo == OptimizerId::adamax) {
                DenseVector dir(d);
                for (std::size_t i = 0; i < d; ++i) dir[i] = diag.numerator[i] / diag.sigma[i];
                diag.direction = std::move(dir);
            } else {
                diag.direction =
                    sign_conversion_step(diag.numerator, diag.sigma, draw_noise()).to_dense();
            }
            break;
        }
    }

    // Decoupled weight decay acts on the pre-step iterate, outside the
    // gradient-derived direction.
    DenseVector x(d);
    for (std::size_t i = 0; i < d; ++i) {
        x[i] = state.x[i] - lr * diag.direction[i] - lr * h.weight_decay * state.x[i];
    }
    state.x = std::move(x);
    state.step_count = t;

    if (detail::is_max_buffer_family(state.algo)) {
        for (std::size_t i = 0; i < d; ++i) {
            if (state.precond[i] < std::abs(state.momentum[i])) {
                throw std::logic_error("practical_step: max-buffer lost domination");
            }
        }
    }
    return diag;
}

/// Converted counterpart under the sign-conversion framework: same buffer
/// recurrences, update replaced by the stochastic sign of (numerator, sigma).
inline OptimizerId sign_converted_of(OptimizerId base) {
    switch (base) {
        case OptimizerId::adamw: return OptimizerId::sign_adamw;
        case OptimizerId::adamax: return OptimizerId::sign_adamax;
        case OptimizerId::ie_stosignsgd: return OptimizerId::stosignsgd_v2;
        default:
            throw std::invalid_argument("sign_converted_of: no converted form for " +
                                        to_string(base));
    }
}

/// Trick decomposition of the optimizer family: structural noise in the sign,
/// sigma coupled to the momentum, and infinity-norm (max) tracking in sigma.
struct TrickRow {
    OptimizerId id;
    bool structural_noise;
    bool sigma_depends_on_m;
    bool inf_norm_sigma;
};

inline std::array<TrickRow, 7> trick_matrix() {
    return {{
        {OptimizerId::signsgd, false, false, false},
        {OptimizerId::adamw, false, false, false},
        {OptimizerId::adamax, false, false, true},
        {OptimizerId::ie_stosignsgd, false, true, true},
        {OptimizerId::sign_adamw, true, false, false},
        {OptimizerId::sign_adamax, true, false, true},
        {OptimizerId::stosignsgd, true, true, true},
    }};
}

/// Injected learning-rate schedules; updates themselves are schedule-agnostic.
struct LrSchedule {
    enum class Kind { constant, inv_sqrt, cosine };
    Kind kind = Kind::constant;
    double lr = 1e-2;
    std::size_t horizon = 0;   // cosine only
    double min_ratio = 0.0;    // cosine floor as a fraction of lr

    double at(std::size_t t) const {
        if (t == 0) throw std::invalid_argument("LrSchedule::at: steps are 1-based");
        switch (kind) {
            case Kind::constant: return lr;
            case Kind::inv_sqrt: return lr / std::sqrt(static_cast<double>(t));
            case Kind::cosine: {
                if (horizon < 2) return lr;
                const double lo = lr * min_ratio;
                const double phase = static_cast<double>(t - 1) / static_cast<double>(horizon - 1);
                return lo + 0.5 * (lr - lo) * (1.0 + std::cos(phase * 3.14159265358979323846));
            }
        }
        throw std::logic_error("LrSchedule::at: bad kind");
    }

    static LrSchedule constant(double lr) { return {Kind::constant, lr, 0, 0.0}; }
    static LrSchedule inv_sqrt(double lr) { return {Kind::inv_sqrt, lr, 0, 0.0}; }
    static LrSchedule cosine(double lr, std::size_t horizon, double min_ratio = 0.0) {
        return {Kind::cosine, lr, horizon, min_ratio};
    }
};

struct PracticalRunResult {
    RunRecord record;
    PracticalState final_state;
    double final_loss = 0.0;
};

/// Drives one optimizer for T steps against the oracle, logging loss and the
/// signal-to-noise diagnostics of the realized updates.
inline PracticalRunResult run_practical(OptimizerId algo, StochasticOracle& oracle,
                                        DenseVector x0, std::size_t T, const LrSchedule& schedule,
                                        OptimizerHyper hyper, RngStream& rng,
                                        const NoiseFn& noise = {}) {
    if (T == 0) throw std::invalid_argument("run_practical: T must be >= 1");
    const Problem& problem = oracle.base();
    PracticalState state = make_state(algo, std::move(x0), hyper);

    RunRecord record({"t", "lr", "loss", "grad_l1", "m_l1", "rms_ratio", "update_rms"});
    for (std::size_t t = 1; t <= T; ++t) {
        const DenseVector g = oracle.gradient(state.x);
        const double loss = problem.value(state.x);
        const StepDiag diag = practical_step(state, g, schedule.at(t), &rng, noise);
        // rms_ratio is the signal-to-noise diagnostic ||clamp(m/sigma)||_RMS;
        // update_rms is the realized direction magnitude (1 for sign methods).
        const double rms_ratio = diag.sigma.empty()
                                     ? norms(diag.direction).rms
                                     : snr_metrics(diag.numerator, diag.sigma).rms_of_ratio;
        record.add_row({static_cast<double>(t), schedule.at(t), loss, norms(g).l1,
                        norms(state.momentum).l1, rms_ratio, norms(diag.direction).rms});
    }

    PracticalRunResult result{std::move(record), std::move(state), 0.0};
    result.final_loss = problem.value(result.final_state.x);
    result.record.set_summary("final_loss", result.final_loss);
    result.record.set_summary("final_rms_ratio", result.record.cell(T - 1, "rms_ratio"));
    result.record.set_summary("final_update_rms", result.record.cell(T - 1, "update_rms"));
    return result;
}

} // namespace stosign
