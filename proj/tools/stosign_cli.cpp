// Command-line front end for the experiment harness. Exit codes: 0 success,
// 1 verification failure, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "stosign/stosign.hpp"

namespace {

struct CommonFlags {
    std::vector<std::uint64_t> seeds;
    std::string out;
    bool override_guardrail = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seeds", flags.seeds, "seed list (default depends on the experiment)")
        ->delimiter(',');
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_flag("--override-guardrail", flags.override_guardrail,
                  "run schedules past the step-count cap");
}

void apply_common(stosign::ExperimentConfig& cfg, const CommonFlags& flags,
                  const std::string& default_out) {
    if (!flags.seeds.empty()) cfg.seeds = flags.seeds;
    cfg.out_dir = flags.out.empty() ? default_out : flags.out;
    cfg.override_guardrail = flags.override_guardrail;
}

int execute(const stosign::ExperimentConfig& cfg) {
    try {
        return stosign::run_experiment(cfg, std::cout);
    } catch (const stosign::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sign-based stochastic optimization experiments"};
    app.require_subcommand(1);

    // run <config>
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run every experiment section in a config file");
    run_cmd->add_option("config", config_path, "config file path")->required();
    CommonFlags run_flags;
    add_common(run_cmd, run_flags);

    auto make_subcommand = [&](const std::string& name, const std::string& help,
                               CommonFlags& flags) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, flags);
        return cmd;
    };

    CommonFlags verify_flags, convex_flags, regret_flags, nonconvex_flags, ablate_flags,
        bruteforce_flags;
    make_subcommand("verify-sign", "Monte-Carlo checks of the stochastic sign law", verify_flags);
    make_subcommand("convex-demo", "non-smooth counterexample: sign descent vs stochastic sign",
                    convex_flags);
    make_subcommand("online-regret", "regret envelope against the Rademacher adversary",
                    regret_flags);
    auto* nonconvex_cmd = make_subcommand("nonconvex", "random-scaling non-convex drivers",
                                          nonconvex_flags);
    std::string variant = "exp";
    nonconvex_cmd->add_option("--variant", variant, "exp | uniform")
        ->check(CLI::IsMember({"exp", "uniform"}));
    make_subcommand("ablate", "optimizer family ablation on the toy objective", ablate_flags);
    make_subcommand("adversary-bruteforce", "exhaustive expected max-regret oracle",
                    bruteforce_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

    if (run_cmd->parsed()) {
        std::vector<stosign::ExperimentConfig> configs;
        try {
            configs = stosign::parse_config_file(config_path);
        } catch (const stosign::ConfigError& err) {
            std::cerr << "config error: " << err.what() << "\n";
            return 2;
        }
        int status = 0;
        for (auto cfg : configs) {
            if (!run_flags.seeds.empty()) cfg.seeds = run_flags.seeds;
            if (!run_flags.out.empty()) cfg.out_dir = run_flags.out;
            if (run_flags.override_guardrail) cfg.override_guardrail = true;
            std::cout << "== " << cfg.name << " (" << cfg.kind << ") ==\n";
            status = std::max(status, execute(cfg));
        }
        return status;
    }

    stosign::ExperimentConfig cfg;
    if (app.get_subcommand("verify-sign")->parsed()) {
        cfg.kind = "verify-sign";
        cfg.seeds = {1};
        apply_common(cfg, verify_flags, "out/verify-sign");
    } else if (app.get_subcommand("convex-demo")->parsed()) {
        cfg.kind = "convex-demo";
        apply_common(cfg, convex_flags, "out/convex-demo");
    } else if (app.get_subcommand("online-regret")->parsed()) {
        cfg.kind = "online-regret";
        apply_common(cfg, regret_flags, "out/online-regret");
    } else if (nonconvex_cmd->parsed()) {
        cfg.kind = "nonconvex";
        cfg.variant = variant;
        cfg.noise_model = "bounded-uniform";
        cfg.relaxed_K = 8;
        cfg.relaxed_N = 60;
        cfg.relaxed_dinf = variant == "uniform" ? 1.0 / 60.0 : 0.02;
        cfg.delta = 1.0;
        apply_common(cfg, nonconvex_flags, "out/nonconvex");
    } else if (app.get_subcommand("ablate")->parsed()) {
        cfg.kind = "ablate";
        cfg.noise_model = "bounded-uniform";
        cfg.seeds = {1, 2, 3};
        apply_common(cfg, ablate_flags, "out/ablate");
    } else if (app.get_subcommand("adversary-bruteforce")->parsed()) {
        cfg.kind = "adversary-bruteforce";
        cfg.box_radius = 0.5;
        cfg.seeds = {1, 2, 3, 4, 5};
        apply_common(cfg, bruteforce_flags, "out/adversary-bruteforce");
    }
    return execute(cfg);
}
