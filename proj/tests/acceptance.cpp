// Acceptance suite: runs every verification criterion end to end and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stosign/stosign.hpp"

using namespace stosign;
namespace fs = std::filesystem;

namespace {

int failures = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

void criterion(int id, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& err) {
        out = {false, std::string("exception: ") + err.what()};
    }
    std::printf("[%s] %02d %s: %s\n", out.pass ? "PASS" : "FAIL", id, name.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.5g", v);
    return buf;
}

// Shared Monte-Carlo sweep for criteria 1-3: twenty random (x, G) instances
// in d = 5, 1e5 draws each.
struct SignSweep {
    double worst_mean_err = 0.0;
    double worst_p_plus_err = 0.0;
    double worst_var_err = 0.0;
    double worst_total_var_err = 0.0;
};

const SignSweep& sign_sweep() {
    static const SignSweep sweep = [] {
        SignSweep out;
        const std::size_t d = 5, n = 100000;
        for (std::size_t inst = 0; inst < 20; ++inst) {
            RngStream inst_rng(1, 1000 + inst);
            DenseVector scale(d), x(d);
            for (std::size_t i = 0; i < d; ++i) {
                scale[i] = 0.25 + 1.75 * inst_rng.uniform01();
                x[i] = scale[i] * inst_rng.uniform_sym();
            }
            const SignLaw law = sign_law(x, scale);
            RngStream rng(1, 2000 + inst);
            std::vector<double> sum(d, 0.0), plus(d, 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                const SignVector s = stochastic_sign(x, scale, rng);
                for (std::size_t i = 0; i < d; ++i) {
                    sum[i] += s[i];
                    if (s[i] == 1) plus[i] += 1.0;
                }
            }
            double total_var = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double mean = sum[i] / n;
                const double var = 1.0 - mean * mean; // s^2 = 1 a.s. for G > 0
                out.worst_mean_err = std::max(out.worst_mean_err, std::abs(mean - law.mean[i]));
                out.worst_p_plus_err =
                    std::max(out.worst_p_plus_err, std::abs(plus[i] / n - law.p_plus[i]));
                out.worst_var_err = std::max(out.worst_var_err, std::abs(var - law.variance[i]));
                total_var += var;
            }
            out.worst_total_var_err = std::max(
                out.worst_total_var_err, std::abs(total_var - snr_metrics(x, scale).total_variance));
        }
        return out;
    }();
    return sweep;
}

double weighted_objective(const DenseVector& y, const DenseVector& p, const DenseVector& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += w[i] * (y[i] - p[i]) * (y[i] - p[i]);
    return acc;
}

// Grid + ternary-search minimizer of the separable weighted quadratic.
DenseVector bruteforce_projection(const DenseVector& p, const DenseVector& w,
                                  const BoxDomain& box) {
    DenseVector out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto f = [&](double y) { return w[i] * (y - p[i]) * (y - p[i]); };
        double best = box.lo[i], best_val = f(best);
        for (int k = 0; k <= 1000; ++k) {
            const double y = box.lo[i] + (box.hi[i] - box.lo[i]) * k / 1000;
            if (f(y) < best_val) {
                best = y;
                best_val = f(y);
            }
        }
        const double cell = (box.hi[i] - box.lo[i]) / 1000;
        double lo = std::max(box.lo[i], best - cell), hi = std::min(box.hi[i], best + cell);
        for (int it = 0; it < 200; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (f(m1) <= f(m2)) hi = m2; else lo = m1;
        }
        out[i] = 0.5 * (lo + hi);
    }
    return out;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

// Scalar reference for the per-coordinate optimizer recurrences (criterion 13).
struct RefCoord {
    double x = 0.0, m = 0.0, p = 0.0;
};

void ref_step(OptimizerId id, RefCoord& s, double g, double nu, double lr,
              const OptimizerHyper& h, int t) {
    const bool raw_init = id == OptimizerId::stosignsgd || id == OptimizerId::stosignsgd_v2 ||
                          id == OptimizerId::signsgd || id == OptimizerId::ie_stosignsgd;
    s.m = (raw_init && t == 1) ? g : h.beta1 * s.m + (1.0 - h.beta1) * g;
    const auto sgn = [](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); };
    double dir = 0.0;
    switch (id) {
        case OptimizerId::signsgd:
            dir = sgn(s.m);
            break;
        case OptimizerId::stosignsgd:
            s.p = std::max(s.p, std::abs(s.m));
            dir = sgn(s.m + s.p * nu);
            break;
        case OptimizerId::stosignsgd_v2:
            s.p = std::max(h.beta2 * s.p, std::abs(s.m));
            dir = sgn(s.m + s.p * nu);
            break;
        case OptimizerId::ie_stosignsgd:
            s.p = std::max(h.beta2 * s.p, std::abs(s.m));
            dir = s.p == 0.0 ? 0.0 : s.m / s.p;
            break;
        case OptimizerId::adamw:
        case OptimizerId::sign_adamw: {
            s.p = h.beta2 * s.p + (1.0 - h.beta2) * g * g;
            const double mh = s.m / (1.0 - std::pow(h.beta1, t));
            const double sig = std::sqrt(s.p / (1.0 - std::pow(h.beta2, t))) + h.eps;
            dir = id == OptimizerId::adamw ? mh / sig : sgn(mh + sig * nu);
            break;
        }
        case OptimizerId::adamax:
        case OptimizerId::sign_adamax: {
            s.p = std::max(h.beta2 * s.p, std::abs(g));
            const double mh = s.m / (1.0 - std::pow(h.beta1, t));
            const double sig = s.p + h.eps;
            dir = id == OptimizerId::adamax ? mh / sig : sgn(mh + sig * nu);
            break;
        }
    }
    s.x = s.x - lr * dir - lr * h.weight_decay * s.x;
}

} // namespace

int main() {
    std::printf("acceptance suite\n");

    criterion(1, "stochastic sign unbiasedness", [] {
        const double tol = 4.0 / std::sqrt(100000.0);
        const SignSweep& s = sign_sweep();
        return Outcome{s.worst_mean_err <= tol,
                       "max |mean - x/G| = " + fmt(s.worst_mean_err) + " (tol " + fmt(tol) + ")"};
    });

    criterion(2, "exact sign law", [] {
        const SignSweep& s = sign_sweep();
        return Outcome{s.worst_p_plus_err <= 0.013, "max |P(+1) - (G+x)/(2G)| = " +
                                                        fmt(s.worst_p_plus_err) + " (tol 0.013)"};
    });

    criterion(3, "variance identity", [] {
        const SignSweep& s = sign_sweep();
        const bool ok = s.worst_var_err <= 0.02 && s.worst_total_var_err <= 0.05 * 5.0;
        return Outcome{ok, "per-coordinate err " + fmt(s.worst_var_err) +
                               " (tol 0.02), total err " + fmt(s.worst_total_var_err) +
                               " (tol 0.25)"};
    });

    criterion(4, "Exp(1) moments", [] {
        RngStream rng(7, 0);
        const std::size_t n = 1000000;
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = sample_exp1(rng);
            sum += s;
            sumsq += s * s;
        }
        const double m1 = sum / n, m2 = sumsq / n;
        const bool ok = std::abs(m1 - 1.0) <= 0.01 && std::abs(m2 - 2.0) <= 0.05;
        return Outcome{ok, "E[s] = " + fmt(m1) + " (1 +- 0.01), E[s^2] = " + fmt(m2) +
                               " (2 +- 0.05)"};
    });

    criterion(5, "weighted projection vs brute force", [] {
        RngStream rng(11, 0);
        double worst_gap = 0.0;
        bool nonexpansive = true;
        for (int inst = 0; inst < 100; ++inst) {
            const std::size_t d = 1 + rng.next_u64() % 3;
            DenseVector lo(d), hi(d), p(d), w(d), z(d);
            for (std::size_t i = 0; i < d; ++i) {
                const double a = 2.0 * rng.uniform_sym(), b = 2.0 * rng.uniform_sym();
                lo[i] = std::min(a, b);
                hi[i] = std::max(a, b);
                p[i] = 4.0 * rng.uniform_sym();
                w[i] = 0.05 + 3.0 * rng.uniform01();
                z[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform01();
            }
            const BoxDomain box(lo, hi);
            const DenseVector proj = project_weighted(p, w, box);
            const DenseVector bf = bruteforce_projection(p, w, box);
            worst_gap = std::max(
                worst_gap, std::abs(weighted_objective(proj, p, w) - weighted_objective(bf, p, w)));
            nonexpansive = nonexpansive &&
                           weighted_objective(proj, z, w) <= weighted_objective(p, z, w) + 1e-12;
        }
        const bool ok = worst_gap <= 1e-6 && nonexpansive;
        return Outcome{ok, "max objective gap " + fmt(worst_gap) +
                               " (tol 1e-6), non-expansive on all instances: " +
                               (nonexpansive ? "yes" : "NO")};
    });

    criterion(6, "fig1 counterexample: sign descent stuck, stochastic sign converges", [] {
        const std::size_t T = 10000;
        const SignsgdDemoResult demo = run_signsgd_fig1_demo(T, DenseVector{0.8, 0.2}, 2.0);
        const bool stuck =
            demo.conservation_ok && demo.min_loss_while_distinct >= 1.0 - 1e-12;

        const Problem p = fig1_objective();
        std::vector<double> avg_losses;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            StochasticOracle oracle(p, RngStream(seed, 1));
            RngStream rng(seed, 0);
            OnlineRunResult run = run_online_convex(oracle, T, BoxDomain::symmetric(2, 1.0),
                                                    StepSchedule::anytime(), DenseVector{0.8, 0.2},
                                                    DenseVector{0.0, 0.0}, rng);
            avg_losses.push_back(run.record.summary_value("loss_at_average_iterate"));
        }
        const double median = median_of(avg_losses);
        const bool converges = median <= 0.34;

        const std::size_t verified =
            demo.first_collision_t == 0 ? T : demo.first_collision_t - 1;
        std::string detail = "signsgd pinned at f >= " + fmt(demo.min_loss_while_distinct) +
                             " over " + std::to_string(verified) + " verified-distinct steps";
        if (demo.first_collision_t > 0) {
            detail += " (exact rounding collision x1 == x2 at t = " +
                      std::to_string(demo.first_collision_t) + ")";
        }
        detail += "; stosignsgd median f(avg) = " + fmt(median) + " <= 0.34";
        return Outcome{stuck && converges, detail};
    });

    criterion(7, "regret envelope and sublinear growth", [] {
        const std::size_t d = 4;
        const BoxDomain box = BoxDomain::symmetric(d, 1.0);
        const DenseVector L = DenseVector::constant(d, 1.0);
        const double coeff = (2.0 + std::sqrt(2.0)) * inf_diameter(box) * norms(L).l1;
        std::vector<double> means;
        bool envelope_ok = true;
        std::string detail;
        for (std::size_t T : {std::size_t{256}, std::size_t{1024}, std::size_t{4096}}) {
            double mean = 0.0;
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                RngStream adv_rng(seed, 2);
                const AdversarySequence adv = rademacher_adversary(adv_rng, T, d, L);
                RngStream rng(seed, 0);
                OnlineRunResult run = run_online_linear(adv, box, StepSchedule::anytime(),
                                                        DenseVector::zeros(d), rng);
                mean += run.max_regret / 20.0;
            }
            means.push_back(mean);
            const double bound = coeff * std::sqrt(static_cast<double>(T));
            envelope_ok = envelope_ok && mean <= bound;
            detail += "T=" + std::to_string(T) + ": " + fmt(mean) + " <= " + fmt(bound) + "; ";
        }
        const double r1 = means[1] / means[0], r2 = means[2] / means[1];
        const bool sublinear = r1 < 4.0 && r2 < 4.0;
        detail += "growth ratios " + fmt(r1) + ", " + fmt(r2) + " < 4";
        return Outcome{envelope_ok && sublinear, detail};
    });

    criterion(8, "brute-force regret oracle", [] {
        const double exact = bruteforce_expected_max_regret(4, 0.5, 1.0);
        std::vector<double> mc;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            RngStream rng(seed, 2);
            double acc = 0.0;
            const std::size_t samples = 2000;
            const std::vector<DenseVector> zeros(4, DenseVector{0.0});
            for (std::size_t k = 0; k < samples; ++k) {
                const AdversarySequence seq = rademacher_adversary(rng, 4, 1, DenseVector{1.0});
                acc += best_fixed_regret(seq, zeros, BoxDomain::symmetric(1, 0.5));
            }
            mc.push_back(acc / samples);
        }
        double mean = 0.0;
        for (double v : mc) mean += v / mc.size();
        double ss = 0.0;
        for (double v : mc) ss += (v - mean) * (v - mean);
        const double sem =
            std::sqrt(ss / static_cast<double>(mc.size() - 1)) / std::sqrt(double(mc.size()));
        const bool ok = exact == 0.75 && std::abs(mean - exact) <= 3.0 * sem;
        return Outcome{ok, "exhaustive = " + fmt(exact) + " (expect 0.75 exactly), MC = " +
                               fmt(mean) + " +- " + fmt(sem)};
    });

    criterion(9, "schedule arithmetic", [] {
        const ScheduleParams a = schedule_exponential(1.0, 1.0, 1.0, 1.0);
        const ScheduleParams b = schedule_exponential(1.0, 0.01, 0.1, 1.0);
        const ScheduleParams c = schedule_uniform(1.0, 1.0, 1.0, 1.0);
        const bool ok = a.block_count == 14 && a.block_len == 751 && b.block_count == 42 &&
                        b.block_len == 75100 && c.block_count == 3 && c.block_len == 21;
        return Outcome{ok, "exp(1,1,1,1) -> K=" + std::to_string(a.block_count) + ", N=" +
                               std::to_string(a.block_len) + "; exp(1,0.01,0.1,1) -> K=" +
                               std::to_string(b.block_count) + ", N=" +
                               std::to_string(b.block_len) + "; unif(1,1,1,1) -> K=" +
                               std::to_string(c.block_count) + ", N=" +
                               std::to_string(c.block_len)};
    });

    criterion(10, "exponential driver golden trace (lagged indices)", [] {
        const ScheduleParams params =
            relaxed_schedule(ScheduleParams::Variant::exponential, 3, 1, 0.1, 1.0);
        StochasticOracle oracle(toy_nonconvex(2), RngStream(123, 1));

        RngStream noise_rng(123, 7), scale_rng(123, 8);
        std::vector<DenseVector> noise_log;
        std::vector<double> scale_log;
        std::vector<DriverStepTrace> traces;
        NonconvexHooks hooks;
        hooks.noise = [&](std::size_t dd) {
            DenseVector n = sample_uniform_sym(noise_rng, dd);
            noise_log.push_back(n);
            return n;
        };
        hooks.scale = [&] {
            const double s = sample_exp1(scale_rng);
            scale_log.push_back(s);
            return s;
        };
        hooks.trace = [&](const DriverStepTrace& t) { traces.push_back(t); };

        RngStream rng(123, 0);
        run_exponential(oracle, DenseVector{0.5, -0.25}, params, rng, hooks,
                        DenseVector{0.05, -0.05});

        // Lagged discipline: no sign noise consumed at t = 1.
        if (noise_log.size() != 2 || scale_log.size() != 3 || traces.size() != 3) {
            return Outcome{false, "unexpected draw counts"};
        }

        // Hand-stepped reference in plain scalars. N = 1, so eta_t = sqrt(2) D.
        const auto grad = [](double v) {
            const double a = 1.0 + std::abs(v);
            return static_cast<double>((v > 0.0) - (v < 0.0)) / (a * a);
        };
        const auto clamp01 = [](double v) { return std::min(0.1, std::max(-0.1, v)); };
        const auto sgn = [](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); };
        const double eta_prev = std::sqrt(2.0) * 0.1;

        double dx[2] = {0.05, -0.05}, xx[2] = {0.5, -0.25}, gg[2] = {0.0, 0.0},
               GG[2] = {0.0, 0.0};
        double worst = 0.0;
        for (std::size_t t = 1; t <= 3; ++t) {
            if (t > 1) {
                const DenseVector& n = noise_log[t - 2];
                for (int i = 0; i < 2; ++i) {
                    dx[i] = clamp01(dx[i] - eta_prev * sgn(gg[i] + GG[i] * n[i]));
                }
            } else {
                for (int i = 0; i < 2; ++i) dx[i] = clamp01(dx[i]);
            }
            const double s = scale_log[t - 1];
            for (int i = 0; i < 2; ++i) xx[i] = xx[i] + s * dx[i];
            for (int i = 0; i < 2; ++i) {
                gg[i] = grad(xx[i]);
                GG[i] = std::max(GG[i], std::abs(gg[i]));
            }
            const DriverStepTrace& tr = traces[t - 1];
            worst = std::max(worst, std::abs(tr.scale - s));
            for (int i = 0; i < 2; ++i) {
                worst = std::max(worst, std::abs(tr.delta[i] - dx[i]));
                worst = std::max(worst, std::abs(tr.x[i] - xx[i]));
                worst = std::max(worst, std::abs(tr.grad[i] - gg[i]));
                worst = std::max(worst, std::abs(tr.max_grad[i] - GG[i]));
            }
        }
        return Outcome{worst <= 1e-12, "max |state - hand reference| = " + fmt(worst) +
                                           " (tol 1e-12); noise draws start at t = 2"};
    });

    criterion(11, "uniform-variant block radius", [] {
        const double delta = 0.5;
        const Problem p = toy_nonconvex(3);
        const double l1 = norms(p.lipschitz_L).l1 + 0.25 * 3.0;
        const ScheduleParams params = schedule_uniform(1.5, delta, 1.0, l1);
        bool all_ok = true;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            StochasticOracle oracle(p, StochasticOracle::Noise::bounded_uniform,
                                    DenseVector::constant(3, 0.25), RngStream(seed, 1));
            RngStream rng(seed, 0);
            const NonconvexResult run =
                run_uniform(oracle, DenseVector::constant(3, 0.8), params, rng);
            all_ok = all_ok && run.radius_ok_all;
        }
        return Outcome{all_ok, "max ||w - block mean||_inf <= delta = " + fmt(delta) +
                                   " on all blocks of 5 seeded runs (K=" +
                                   std::to_string(params.block_count) + ", N=" +
                                   std::to_string(params.block_len) + ")"};
    });

    criterion(12, "sign-conversion equivalence", [] {
        const std::size_t n = 100000;
        double worst_unsat = 0.0;
        std::size_t states_checked = 0, saturated_seen = 0;
        bool saturated_exact = true;

        for (OptimizerId id : {OptimizerId::stosignsgd, OptimizerId::stosignsgd_v2,
                               OptimizerId::sign_adamw, OptimizerId::sign_adamax}) {
            // Gradient schedules chosen so the Adam-style sigmas are driven
            // past |numerator| on some coordinates (saturation) while the max
            // buffer family stays strictly dominated, exercising both regimes.
            OptimizerHyper hyper = default_hyper(id);
            std::function<DenseVector(int)> grad_at;
            if (id == OptimizerId::sign_adamw) {
                // Fast momentum over a long-memory second moment: recent large
                // gradients push m-hat past sqrt(v-hat).
                hyper.beta1 = 0.5;
                grad_at = [](int t) {
                    return DenseVector{t <= 15 ? 0.01 : 1.2, t <= 15 ? -0.008 : -1.0};
                };
            } else if (id == OptimizerId::sign_adamax) {
                // Fast-decaying max buffer under collapsing gradients: u
                // forgets faster than the momentum does.
                hyper.beta2 = 0.5;
                grad_at = [](int t) {
                    const double a = t <= 5 ? 2.0 : (t <= 10 ? 0.3 : 0.001);
                    return DenseVector{a, -0.8 * a};
                };
            } else {
                grad_at = [](int t) {
                    return DenseVector{0.4 * std::cos(0.7 * t), 0.5 * std::sin(1.1 * t)};
                };
            }
            PracticalState state = make_state(id, DenseVector::zeros(2), hyper);
            RngStream step_rng(21, 0);
            std::vector<StepDiag> states;
            for (int t = 1; t <= 20; ++t) {
                const StepDiag diag = practical_step(state, grad_at(t), 0.01, &step_rng);
                if (t > 10) states.push_back(diag);
            }
            RngStream mc_rng(22, static_cast<std::uint64_t>(id));
            for (const StepDiag& diag : states) {
                ++states_checked;
                DenseVector sum(2);
                for (std::size_t k = 0; k < n; ++k) {
                    const SignVector s = sign_conversion_step(diag.numerator, diag.sigma,
                                                              sample_uniform_sym(mc_rng, 2));
                    for (std::size_t i = 0; i < 2; ++i) sum[i] += s[i];
                }
                for (std::size_t i = 0; i < 2; ++i) {
                    const double mean = sum[i] / n;
                    if (std::abs(diag.numerator[i]) > diag.sigma[i]) {
                        ++saturated_seen;
                        const double expected =
                            std::clamp(diag.numerator[i] / diag.sigma[i], -1.0, 1.0);
                        saturated_exact = saturated_exact && mean == expected;
                    } else {
                        const double expected =
                            diag.sigma[i] == 0.0 ? 0.0 : diag.numerator[i] / diag.sigma[i];
                        worst_unsat = std::max(worst_unsat, std::abs(mean - expected));
                    }
                }
            }
        }
        const bool ok = worst_unsat <= 0.013 && saturated_seen > 0 && saturated_exact;
        return Outcome{ok, "max |MC mean - m/sigma| = " + fmt(worst_unsat) + " (tol 0.013) over " +
                               std::to_string(states_checked) + " reachable states; " +
                               std::to_string(saturated_seen) +
                               " saturated coordinates matched clamp exactly"};
    });

    criterion(13, "optimizer golden traces", [] {
        // AdamW two-step hand trace.
        PracticalState adamw = make_state(OptimizerId::adamw, DenseVector{1.0});
        practical_step(adamw, DenseVector{0.5}, 0.1);
        double worst = std::abs(adamw.momentum[0] - 0.05);
        worst = std::max(worst, std::abs(adamw.precond[0] - 0.00025));
        if (std::abs(adamw.x[0] - 0.9) > 1e-6) {
            return Outcome{false, "adamw step-1 iterate " + fmt(adamw.x[0]) + " != ~0.9"};
        }
        {
            const double m2 = 0.9 * 0.05 + 0.1 * 0.5;
            const double v2 = 0.999 * 0.00025 + 0.001 * 0.25;
            const double x2 = adamw.x[0] - 0.1 * (m2 / (1.0 - 0.81)) /
                                               (std::sqrt(v2 / (1.0 - 0.999 * 0.999)) + 1e-8);
            practical_step(adamw, DenseVector{0.5}, 0.1);
            worst = std::max(worst, std::abs(adamw.x[0] - x2));
        }

        // Three-step traces for the whole family against the scalar reference.
        const std::vector<DenseVector> grads{DenseVector{0.4, -0.3}, DenseVector{-0.2, 0.5},
                                             DenseVector{0.1, 0.1}};
        RngStream noise_rng(31, 0);
        std::vector<DenseVector> noises;
        for (int t = 0; t < 3; ++t) noises.push_back(sample_uniform_sym(noise_rng, 2));

        for (OptimizerId id : {OptimizerId::stosignsgd, OptimizerId::stosignsgd_v2,
                               OptimizerId::signsgd, OptimizerId::adamw, OptimizerId::adamax,
                               OptimizerId::sign_adamw, OptimizerId::sign_adamax,
                               OptimizerId::ie_stosignsgd}) {
            OptimizerHyper hyper = default_hyper(id);
            hyper.weight_decay = 0.02;
            PracticalState state = make_state(id, DenseVector{0.3, -0.6}, hyper);
            RefCoord ref[2] = {{0.3, 0.0, 0.0}, {-0.6, 0.0, 0.0}};
            for (int t = 1; t <= 3; ++t) {
                const DenseVector& nu = noises[t - 1];
                practical_step(state, grads[t - 1], 0.1, nullptr,
                               [&](std::size_t) { return nu; });
                for (int i = 0; i < 2; ++i) {
                    ref_step(id, ref[i], grads[t - 1][i], nu[i], 0.1, hyper, t);
                    worst = std::max(worst, std::abs(state.x[i] - ref[i].x));
                    worst = std::max(worst, std::abs(state.momentum[i] - ref[i].m));
                    if (id != OptimizerId::signsgd) {
                        worst = std::max(worst, std::abs(state.precond[i] - ref[i].p));
                    }
                }
            }
        }
        return Outcome{worst <= 1e-12,
                       "max |state - hand trace| over eight optimizers = " + fmt(worst) +
                           " (tol 1e-12)"};
    });

    criterion(14, "recurrence identities (bitwise)", [] {
        // (a) StoSignSGDv2 with beta2 = 1 vs StoSignSGD under a shared stream.
        OptimizerHyper v2h = default_hyper(OptimizerId::stosignsgd_v2);
        v2h.beta2 = 1.0;
        v2h.weight_decay = 0.01;
        OptimizerHyper v1h = default_hyper(OptimizerId::stosignsgd);
        v1h.weight_decay = 0.01;
        PracticalState a = make_state(OptimizerId::stosignsgd, DenseVector{0.4, -0.2}, v1h);
        PracticalState b = make_state(OptimizerId::stosignsgd_v2, DenseVector{0.4, -0.2}, v2h);
        RngStream ra(51, 0), rb(51, 0), grads(52, 0);
        bool v2_identical = true;
        for (int t = 0; t < 200; ++t) {
            DenseVector g(2);
            for (std::size_t i = 0; i < 2; ++i) g[i] = grads.uniform_sym();
            practical_step(a, g, 0.03, &ra);
            practical_step(b, g, 0.03, &rb);
            v2_identical = v2_identical && a.x == b.x && a.momentum == b.momentum &&
                           a.precond == b.precond;
        }

        // (b) Noiseless-hook online learner vs scalar projected sign descent.
        const std::size_t d = 3, T = 200;
        const BoxDomain box = BoxDomain::symmetric(d, 1.0);
        RngStream adv(53, 0);
        OnlineState state(DenseVector::zeros(d), box, StepSchedule::anytime());
        RngStream rng(54, 0);
        double ref[3] = {0.0, 0.0, 0.0};
        bool online_identical = true;
        for (std::size_t t = 1; t <= T; ++t) {
            DenseVector g(d);
            for (std::size_t i = 0; i < d; ++i) g[i] = 2.0 * adv.uniform_sym();
            online_step(state, g, rng, zero_noise());
            const double step = eta(t, inf_diameter(box), StepSchedule::anytime());
            for (std::size_t i = 0; i < d; ++i) {
                const double s = static_cast<double>((g[i] > 0.0) - (g[i] < 0.0));
                ref[i] = std::min(box.hi[i], std::max(box.lo[i], ref[i] - step * s));
                online_identical = online_identical && state.x[i] == ref[i];
            }
        }
        const bool ok = v2_identical && online_identical;
        return Outcome{ok, std::string("v2(beta2=1) == stosignsgd: ") +
                               (v2_identical ? "bitwise" : "MISMATCH") +
                               "; noiseless online == projected sign descent: " +
                               (online_identical ? "bitwise" : "MISMATCH")};
    });

    criterion(15, "experiment determinism", [] {
        const fs::path base = fs::temp_directory_path() / "stosign_acceptance_det";
        fs::remove_all(base);
        std::ostringstream log;
        for (const char* run : {"a", "b"}) {
            ExperimentConfig cfg;
            cfg.kind = "convex-demo";
            cfg.seeds = {1, 2, 3};
            cfg.horizons = {500};
            cfg.out_dir = (base / run).string();
            if (run_experiment(cfg, log) != 0) return Outcome{false, "experiment failed"};
        }
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(base / "a")) {
            ++files;
            std::ifstream fa(entry.path(), std::ios::binary);
            std::ifstream fb(base / "b" / entry.path().filename(), std::ios::binary);
            std::ostringstream sa, sb;
            sa << fa.rdbuf();
            sb << fb.rdbuf();
            if (sa.str() != sb.str() || sa.str().empty()) {
                return Outcome{false, "mismatch in " + entry.path().filename().string()};
            }
        }
        return Outcome{files > 0,
                       std::to_string(files) + " artifact files byte-identical on rerun"};
    });

    std::printf("%d of 15 criteria passed\n", 15 - failures);
    return failures == 0 ? 0 : 1;
}
