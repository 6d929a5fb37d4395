// mbsrl: command line front end for the experiments.

#include "mbs/cartpole.hpp"
#include "mbs/dataset.hpp"
#include "mbs/environments.hpp"
#include "mbs/experiment.hpp"
#include "mbs/mdp_io.hpp"
#include "mbs/spec.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <thread>

namespace {

struct Common {
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> repeats;
    std::string environment;
    std::string out_dir = "results";
    std::size_t jobs = 0;
};

void add_common(CLI::App* cmd, Common& c, mbs::ExperimentKind kind) {
    cmd->add_option("--spec", c.spec_path, "Experiment spec file (defaults are used when omitted)");
    cmd->add_option("--seed", c.seed, "Override the base seed");
    cmd->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--jobs", c.jobs, "Worker threads (0 = hardware concurrency)");
    if (kind == mbs::ExperimentKind::success_rate) {
        cmd->add_option("--env", c.environment, "rare_transition or combination_lock");
    }
    if (kind == mbs::ExperimentKind::success_rate || kind == mbs::ExperimentKind::cartpole)
        cmd->add_option("--repeats", c.repeats, "Override the number of repeats");
}

void print_theory_table(const mbs::ExperimentResult& r) {
    struct Tally {
        std::size_t cases = 0, passed = 0;
        double worst = -std::numeric_limits<double>::infinity();
    };
    std::vector<std::pair<std::string, Tally>> rows;
    for (const auto& t : r.theory) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& p) { return p.first == t.check; });
        if (it == rows.end()) it = rows.insert(rows.end(), {t.check, {}});
        ++it->second.cases;
        it->second.passed += t.passed;
        it->second.worst = std::max(it->second.worst, t.residual);
    }
    std::printf("%-28s %8s %8s %14s  %s\n", "check", "cases", "passed", "max residual", "result");
    for (const auto& [name, t] : rows)
        std::printf("%-28s %8zu %8zu %14.3e  %s\n", name.c_str(), t.cases, t.passed, t.worst,
                    t.passed == t.cases ? "PASS" : "FAIL");
}

int run(mbs::ExperimentKind kind, const Common& c) {
    mbs::ExperimentSpec spec = c.spec_path.empty() ? mbs::default_spec(kind) : mbs::load_spec(c.spec_path);
    if (spec.experiment != kind)
        throw mbs::SpecError("spec '" + c.spec_path + "' describes a " + mbs::to_string(spec.experiment) +
                             " experiment");
    if (c.seed) spec.seed = *c.seed;
    if (c.repeats) spec.repeats = *c.repeats;
    if (!c.environment.empty()) spec.environment = c.environment;
    const std::size_t jobs = c.jobs ? c.jobs : std::max(1u, std::thread::hardware_concurrency());

    const mbs::ExperimentResult result = mbs::run_experiment(spec, jobs);
    for (const auto& path : mbs::write_results(result, c.out_dir)) std::cout << "wrote " << path.string() << '\n';

    if (kind == mbs::ExperimentKind::verify_theory) {
        print_theory_table(result);
        for (const auto& t : result.theory)
            if (!t.passed) return 1;
        return 0;
    }
    for (const auto& s : result.summary) {
        std::printf("%-8s %-10s %-14s n=%-7zu eps=%-4s success=%.2f value=%.6g\n", s.environment.substr(0, 8).c_str(),
                    s.algorithm.c_str(), s.hyperparameters.c_str(), s.n, mbs::format_real(s.epsilon).c_str(),
                    s.success_rate, s.value_mean);
    }
    return 0;
}

int export_mdp(const std::string& env, const std::string& out, std::uint64_t seed, std::size_t sampling_episodes) {
    mbs::TabularMdp mdp;
    if (env == "rare_transition") mdp = mbs::build_rare_transition_mdp({}).first;
    else if (env == "combination_lock") mdp = mbs::build_combination_lock_mdp({}).first;
    else if (env == "cartpole") mdp = mbs::build_cartpole_mdp({}, sampling_episodes, seed);
    else throw mbs::SpecError("unknown environment '" + env + "'");
    if (out.empty() || out == "-") mbs::write_mdp(std::cout, mdp);
    else mbs::save_mdp(out, mdp);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular offline RL experiments"};
    app.require_subcommand(1);

    struct Entry {
        const char* name;
        const char* help;
        mbs::ExperimentKind kind;
        Common opts;
        CLI::App* cmd = nullptr;
    };
    std::vector<Entry> entries = {
        {"success-rate", "Success rate versus sample size on a tabular instance", mbs::ExperimentKind::success_rate, {}},
        {"cartpole", "Discretized CartPole comparison and threshold ablation", mbs::ExperimentKind::cartpole, {}},
        {"safe-improve", "Improvement over the behavior policy on random MDPs", mbs::ExperimentKind::safe_improve, {}},
        {"verify-theory", "Numerical checks of the constrained operators", mbs::ExperimentKind::verify_theory, {}},
    };
    for (auto& e : entries) {
        e.cmd = app.add_subcommand(e.name, e.help);
        add_common(e.cmd, e.opts, e.kind);
    }

    std::string env, out;
    std::uint64_t seed = 0;
    std::size_t sampling_episodes = 10;
    auto* exp = app.add_subcommand("export-mdp", "Write a built-in MDP in the text format");
    exp->add_option("env", env, "rare_transition, combination_lock or cartpole")->required();
    exp->add_option("-o,--out", out, "Output file (stdout when omitted)");
    exp->add_option("--seed", seed, "Model sampling seed (cartpole)");
    exp->add_option("--sampling-episodes", sampling_episodes, "Samples per bin and action (cartpole)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*exp) return export_mdp(env, out, seed, sampling_episodes);
        for (auto& e : entries)
            if (*e.cmd) return run(e.kind, e.opts);
    } catch (const mbs::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}
