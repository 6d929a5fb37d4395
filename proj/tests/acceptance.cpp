// Acceptance suite: runs every headline criterion and prints one PASS/FAIL line each.
// Usage: mbs_acceptance [output_dir]

#include "mbs/experiment.hpp"
#include "mbs/spec.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>

using namespace mbs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.passed) ++failures;
    std::printf("%s  %-22s %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct Tally {
    std::size_t cases = 0, passed = 0;
    double worst = -1e300;
};

std::map<std::string, Tally> tally(const ExperimentResult& r) {
    std::map<std::string, Tally> out;
    for (const auto& t : r.theory) {
        auto& x = out[t.check];
        ++x.cases;
        x.passed += t.passed;
        x.worst = std::max(x.worst, t.residual);
    }
    return out;
}

const SummaryRow* find(const std::vector<SummaryRow>& rows, const std::string& alg, const std::string& hyper,
                       std::size_t n, double eps = 0.0) {
    for (const auto& s : rows)
        if (s.algorithm == alg && s.hyperparameters == hyper && s.n == n && s.epsilon == eps) return &s;
    return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_results");
    const std::size_t jobs = 1;

    // Theory checks.
    const auto vt_start = std::chrono::steady_clock::now();
    const ExperimentSpec vt_spec = default_spec(ExperimentKind::verify_theory);
    const ExperimentResult vt = run_verify_theory(vt_spec, jobs);
    const double vt_secs = seconds_since(vt_start);
    write_results(vt, out);
    const auto checks = tally(vt);
    const auto count_line = [&](const std::string& check) {
        const auto it = checks.find(check);
        if (it == checks.end()) return std::string("0/0");
        return std::to_string(it->second.passed) + "/" + std::to_string(it->second.cases);
    };

    report("fixed_point", [&] {
        const auto& t = checks.at("fixed_point");
        return Outcome{t.cases == 200 && t.passed == 200 && vt_secs < 10.0,
                       count_line("fixed_point") + " within 1e-8, max residual " + fmt("%.2e", t.worst) +
                           ", theory suite " + fmt("%.2f", vt_secs) + " s (limit 10 s)"};
    });
    report("projection_bounds", [&] {
        const auto& a = checks.at("projection_value");
        const auto& b = checks.at("escape_bound");
        return Outcome{a.cases == 200 && a.passed == 200 && b.cases == 200 && b.passed == 200,
                       "projection " + count_line("projection_value") + ", escape bound " + count_line("escape_bound") +
                           " at tol 1e-9"};
    });
    report("operator_equivalence", [&] {
        const auto& t = checks.at("operator_projection_equiv");
        return Outcome{t.cases == 100 && t.passed == 100,
                       count_line("operator_projection_equiv") + " within 1e-12, max " + fmt("%.2e", t.worst)};
    });
    report("reduction_identity", [&] {
        const auto& q = checks.at("reduction_mbs_qi_fqi");
        const auto& p = checks.at("reduction_mbs_pi_api");
        return Outcome{q.cases == 20 && q.passed == 20 && p.cases == 20 && p.passed == 20,
                       "MBS-QI=FQI " + count_line("reduction_mbs_qi_fqi") + ", MBS-PI=API " +
                           count_line("reduction_mbs_pi_api") + " exact"};
    });

    // Success rate on both canonical instances.
    std::map<std::string, ExperimentResult> sr;
    double sr_secs = 0.0;
    report("success_rate", [&] {
        const auto start = std::chrono::steady_clock::now();
        for (const char* env : {"rare_transition", "combination_lock"}) {
            ExperimentSpec s = default_spec(ExperimentKind::success_rate);
            s.environment = env;
            sr[env] = run_success_rate(s, jobs);
            write_results(sr[env], out);
        }
        sr_secs = seconds_since(start);
        bool high_ok = true;
        bool margin_ok = false;
        std::string detail;
        for (const auto& [env, r] : sr) {
            const auto* qi_hi = find(r.summary, "mbs_qi", "b=10/n", 100000);
            const auto* pi_hi = find(r.summary, "mbs_pi", "b=10/n", 100000);
            high_ok = high_ok && qi_hi && pi_hi && qi_hi->success_rate >= 0.9 && pi_hi->success_rate >= 0.9;
            double best_baseline = 0.0;
            for (const auto& [alg, hyper] : std::vector<std::pair<std::string, std::string>>{
                     {"fqi", "-"}, {"api", "-"}, {"bcql", "tau=0"}, {"bcql", "tau=0.1"}, {"spibb", "b=10/n"}})
                if (const auto* s = find(r.summary, alg, hyper, 1000)) best_baseline = std::max(best_baseline, s->success_rate);
            const auto* qi = find(r.summary, "mbs_qi", "b=10/n", 1000);
            const auto* pi = find(r.summary, "mbs_pi", "b=10/n", 1000);
            const double margin = std::min(qi ? qi->success_rate : 0.0, pi ? pi->success_rate : 0.0) - best_baseline;
            margin_ok = margin_ok || margin >= 0.3;
            detail += env + ": n=1e5 QI " + fmt("%.2f", qi_hi ? qi_hi->success_rate : 0.0) + " PI " +
                      fmt("%.2f", pi_hi ? pi_hi->success_rate : 0.0) + ", n=1e3 margin " + fmt("%.2f", margin) + "; ";
        }
        detail += "runtime " + fmt("%.0f", sr_secs) + " s (limit 600 s)";
        return Outcome{high_ok && margin_ok && sr_secs < 600.0, detail};
    });

    // CartPole comparison.
    ExperimentResult cp;
    report("cartpole_vs_bc_fqi", [&] {
        const auto start = std::chrono::steady_clock::now();
        cp = run_cartpole(default_spec(ExperimentKind::cartpole), jobs);
        const double secs = seconds_since(start);
        write_results(cp, out);
        bool ok = secs < 1800.0;
        std::string detail;
        for (double eps : cp.spec.epsilon) {
            double best = -1.0;
            std::string best_b;
            for (const auto& t : cp.spec.b) {
                const auto* s = find(cp.summary, "mbs_qi", "b=" + t.to_string(), 10000, eps);
                if (s && s->value_mean > best) {
                    best = s->value_mean;
                    best_b = t.to_string();
                }
            }
            const auto* bc = find(cp.summary, "bc", "-", 10000, eps);
            const auto* fq = find(cp.summary, "fqi", "-", 10000, eps);
            const double bcv = bc ? bc->value_mean : 1e300, fqv = fq ? fq->value_mean : 1e300;
            ok = ok && best >= bcv - 5.0 && best >= fqv - 5.0;
            detail += "eps " + fmt("%.1f", eps) + ": MBS-QI(b=" + best_b + ") " + fmt("%.1f", best) + " BC " +
                      fmt("%.1f", bcv) + " FQI " + fmt("%.1f", fqv) + "; ";
        }
        detail += "runtime " + fmt("%.0f", secs) + " s (limit 1800 s)";
        return Outcome{ok, detail};
    });

    // Safe improvement.
    ExperimentResult si;
    report("safe_improvement", [&] {
        si = run_safe_improve(default_spec(ExperimentKind::safe_improve), jobs);
        write_results(si, out);
        std::size_t ok = 0;
        for (const auto& r : si.rows) ok += r.success;
        return Outcome{ok >= 95 && si.rows.size() == 100,
                       std::to_string(ok) + "/" + std::to_string(si.rows.size()) +
                           " instances with v >= v_mu - 0.05 V_max (need 95)"};
    });

    // Determinism: re-run every experiment with the same spec and compare the CSV bytes.
    report("determinism", [&] {
        const fs::path again = out / "rerun";
        std::vector<std::pair<fs::path, fs::path>> pairs;
        const auto rerun = [&](const ExperimentResult& first, std::size_t threads) {
            const auto a = write_results(first, out);
            const auto b = write_results(run_experiment(first.spec, threads), again);
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i].filename().string().find("_timing") == std::string::npos) pairs.emplace_back(a[i], b[i]);
        };
        rerun(vt, 2);
        rerun(si, 2);
        for (const auto& [env, r] : sr) rerun(r, 2);
        rerun(cp, 2);
        std::size_t same = 0;
        std::string diff;
        for (const auto& [a, b] : pairs) {
            if (read_file(a) == read_file(b) && !read_file(a).empty()) ++same;
            else diff += " " + a.filename().string();
        }
        return Outcome{same == pairs.size(), std::to_string(same) + "/" + std::to_string(pairs.size()) +
                                                 " CSV files byte-identical on re-run with a different thread count" +
                                                 (diff.empty() ? "" : "; differing:" + diff)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
