#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modseq/errors.hpp"
#include "modseq/experiments.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    int threads = 1;
    bool timing = false;
    std::string solution;
    std::optional<int> N;
    std::optional<double> target;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON experiment spec")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "root seed (overrides noise.seed)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--threads", f.threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

modseq::ExperimentSpec build_spec(const Flags& f, modseq::ExperimentKind kind) {
    modseq::ExperimentSpec spec = f.config.empty() ? modseq::ExperimentSpec{} : modseq::load_spec(f.config);
    spec.experiment = kind;
    if (!f.solution.empty()) spec.solution = f.solution;
    if (f.N) spec.N = *f.N;
    if (f.target) spec.target_error = *f.target;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust two-qubit gate sequences: optimization and analysis"};
    app.require_subcommand(1);
    Flags f;

    struct Command {
        const char* name;
        const char* help;
        modseq::ExperimentKind kind;
    };
    const Command commands[] = {
        {"optimize", "cascade optimization over N_list; writes solutions/ and summary.csv",
         modseq::ExperimentKind::sweep_N},
        {"contour", "evaluate a solution on a (sigma_local, sigma_nonlocal) grid", modseq::ExperimentKind::noise_contour},
        {"evaluate", "evaluate a solution under the configured noise", modseq::ExperimentKind::evaluate},
        {"decompose", "Cartan decomposition of a solution's noise-free gate", modseq::ExperimentKind::decompose},
        {"calibrate", "find sigma_nonlocal giving a target uncorrected error", modseq::ExperimentKind::calibrate},
        {"local-fidelity", "Monte Carlo fidelity of noisy local rotations", modseq::ExperimentKind::local_fidelity},
        {"run", "run the experiment named in --config", modseq::ExperimentKind::sweep_N},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        add_common(sub, f);
        subs.emplace_back(sub, &c);
    }
    app.get_subcommand("optimize")->add_flag("--timing", f.timing, "fill the wall_time_s column");
    app.get_subcommand("run")->add_flag("--timing", f.timing, "fill the wall_time_s column");
    for (const char* name : {"contour", "evaluate", "decompose"})
        app.get_subcommand(name)->add_option("--solution", f.solution, "solution JSON file");
    for (const char* name : {"calibrate"}) {
        app.get_subcommand(name)->add_option("--N", f.N, "sequence length");
        app.get_subcommand(name)->add_option("--target", f.target, "target uncorrected gate error");
    }
    app.get_subcommand("run")->needs(app.get_subcommand("run")->get_option("--config"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        for (const auto& [sub, cmd] : subs) {
            if (!sub->parsed()) continue;
            modseq::ExperimentSpec spec =
                build_spec(f, std::string(cmd->name) == "run" ? modseq::load_spec(f.config).experiment : cmd->kind);
            modseq::CommandOptions options;
            options.out_dir = f.out;
            options.seed = f.seed;
            options.threads = f.threads;
            options.timing = f.timing;
            std::cout << modseq::run_experiment(spec, options);
        }
    } catch (const modseq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
