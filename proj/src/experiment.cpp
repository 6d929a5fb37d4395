#include "mbs/experiment.hpp"

#include "mbs/algorithms.hpp"
#include "mbs/cartpole.hpp"
#include "mbs/dataset.hpp"
#include "mbs/environments.hpp"
#include "mbs/rng.hpp"
#include "mbs/solve.hpp"
#include "mbs/theory.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

namespace mbs {
namespace {

constexpr double kSolveTol = 1e-12;

struct Variant {
    std::string algorithm;
    std::string hyperparameters;
    Threshold threshold;  // mbs_qi, mbs_pi, spibb
    double tau = 0.0;     // bcql
    bool has_threshold = false;
};

std::vector<Variant> expand_variants(const ExperimentSpec& spec) {
    std::vector<Variant> out;
    for (const std::string& alg : spec.algorithms) {
        if (alg == "mbs_qi" || alg == "mbs_pi") {
            for (const Threshold& t : spec.b) out.push_back({alg, "b=" + t.to_string(), t, 0.0, true});
        } else if (alg == "spibb") {
            for (const Threshold& t : spec.spibb_b) out.push_back({alg, "b=" + t.to_string(), t, 0.0, true});
        } else if (alg == "bcql") {
            for (double tau : spec.bcql_tau) out.push_back({alg, "tau=" + format_real(tau), {}, tau, false});
        } else {
            out.push_back({alg, "-", {}, 0.0, false});
        }
    }
    return out;
}

struct Trained {
    Policy policy;
    RunTrace trace;
};

Trained train(const Variant& v, const Dataset& data, const DensityEstimate& density, const SupportFilter& filter,
              const AlgorithmConfig& q_cfg, const AlgorithmConfig& pi_cfg) {
    RunResult r;
    if (v.algorithm == "mbs_qi") r = mbs_qi(data, filter, q_cfg);
    else if (v.algorithm == "mbs_pi") r = mbs_pi(data, filter, pi_cfg);
    else if (v.algorithm == "fqi") r = fqi(data, q_cfg);
    else if (v.algorithm == "api") r = api(data, pi_cfg);
    else if (v.algorithm == "bcql") r = bcql(data, density, v.tau, q_cfg);
    else if (v.algorithm == "spibb") r = spibb(data, density, filter, q_cfg);
    else if (v.algorithm == "bc") return {behavior_cloning(data), {}};
    else throw SpecError("unknown algorithm '" + v.algorithm + "'");
    return {std::move(r.policy), std::move(r.trace)};
}

// Mean over states seen in the data of sum_a pi(a|s) zeta(s,a).
double support_rate(const Policy& pi, const SupportFilter& filter, const DensityEstimate& density) {
    double total = 0.0;
    std::size_t states = 0;
    for (StateId s = 0; s < density.num_states(); ++s) {
        if (density.state_counts[s] == 0) continue;
        ++states;
        for (ActionId a = 0; a < density.num_actions(); ++a) total += pi.prob(s, a) * filter.weight(s, a);
    }
    return states ? total / static_cast<double>(states) : 0.0;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::pair<TabularMdp, Policy> build_environment(const std::string& id) {
    if (id == "rare_transition") return build_rare_transition_mdp({});
    if (id == "combination_lock") return build_combination_lock_mdp({});
    throw SpecError("unknown environment '" + id + "'");
}

template <class Row>
std::vector<Row> flatten(std::vector<std::vector<Row>>& slots) {
    std::vector<Row> out;
    for (auto& slot : slots)
        for (auto& row : slot) out.push_back(std::move(row));
    return out;
}

std::uint64_t real_label(double x) { return std::bit_cast<std::uint64_t>(x); }

double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double population_std(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

// Average ranks, ties share the mean rank.
std::vector<double> ranks(const std::vector<double>& xs) {
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> r(xs.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (x.size() < 2 || x.size() != y.size()) return nan;
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return nan;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

bool recompute_success(const ResultRow& row) {
    if (row.success_rule == "safe") return row.policy_value >= row.baseline_value - row.success_tol;
    return std::abs(row.policy_value - row.optimal_value) <= row.success_tol;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    using Key = std::tuple<std::string, std::string, std::string, std::size_t, std::uint64_t>;
    std::map<Key, std::size_t> index;
    std::vector<SummaryRow> out;
    std::vector<std::vector<double>> values, hits;
    for (const ResultRow& r : rows) {
        const Key key{r.environment, r.algorithm, r.hyperparameters, r.n, real_label(r.epsilon)};
        auto [it, fresh] = index.emplace(key, out.size());
        if (fresh) {
            SummaryRow s;
            s.environment = r.environment;
            s.algorithm = r.algorithm;
            s.hyperparameters = r.hyperparameters;
            s.n = r.n;
            s.epsilon = r.epsilon;
            out.push_back(s);
            values.emplace_back();
            hits.emplace_back();
        }
        values[it->second].push_back(r.policy_value);
        hits[it->second].push_back(r.success ? 1.0 : 0.0);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].runs = values[i].size();
        out[i].success_rate = mean(hits[i]);
        out[i].success_std = population_std(hits[i]);
        out[i].value_mean = mean(values[i]);
        out[i].value_std = population_std(values[i]);
    }
    return out;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t j = 0; j < jobs; ++j) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::uint64_t dataset_seed(std::uint64_t base, const std::string& environment, std::size_t n, double epsilon,
                           std::size_t repeat) {
    return derive_seed(base, {hash_label("dataset"), hash_label(environment), n, real_label(epsilon), repeat});
}

std::uint64_t run_seed(std::uint64_t base, const std::string& algorithm, const std::string& hyperparameters,
                       std::size_t n, double epsilon, std::size_t repeat) {
    return derive_seed(base, {hash_label("run"), hash_label(algorithm + "|" + hyperparameters), n, real_label(epsilon),
                              repeat});
}

ExperimentResult run_success_rate(const ExperimentSpec& spec, std::size_t jobs) {
    validate(spec);
    ExperimentResult result;
    result.spec = spec;
    const auto [mdp, behavior] = build_environment(spec.environment);
    const auto vi = exact_value_iteration(mdp, kSolveTol);
    const double v_star = initial_value(mdp, vi.policy, vi.q);
    const double v_mu = policy_value(mdp, behavior, kSolveTol);
    const double tol = spec.success_tol * mdp.v_max();
    const DatasetMode mode = parse_dataset_mode(spec.dataset_mode);
    const auto variants = expand_variants(spec);
    result.facts = {{"optimal_value", format_real(v_star)},
                    {"behavior_value", format_real(v_mu)},
                    {"v_max", format_real(mdp.v_max())}};

    const std::size_t tasks = spec.n.size() * spec.repeats;
    std::vector<std::vector<ResultRow>> slots(tasks);
    parallel_for(tasks, jobs, [&](std::size_t t) {
        const std::size_t n = spec.n[t / spec.repeats];
        const std::size_t rep = t % spec.repeats;
        const std::uint64_t dseed = dataset_seed(spec.seed, spec.environment, n, 0.0, rep);
        const Dataset data = generate_dataset(mdp, behavior, n, mode, dseed);
        const DensityEstimate density = estimate_density(data);
        const SupportFilter default_filter = build_filter(density, spec.b.front().resolve(n));
        for (const Variant& v : variants) {
            const auto start = std::chrono::steady_clock::now();
            const SupportFilter filter = v.has_threshold ? build_filter(density, v.threshold.resolve(n)) : default_filter;
            auto q_cfg = AlgorithmConfig::q_iteration(mdp.gamma(), spec.q_iterations);
            auto pi_cfg = AlgorithmConfig::policy_iteration(mdp.gamma(), spec.pi_outer, spec.pi_inner);
            q_cfg.seed = pi_cfg.seed = run_seed(spec.seed, v.algorithm, v.hyperparameters, n, 0.0, rep);
            const Trained trained = train(v, data, density, filter, q_cfg, pi_cfg);
            ResultRow row;
            row.experiment = to_string(spec.experiment);
            row.environment = spec.environment;
            row.algorithm = v.algorithm;
            row.hyperparameters = v.hyperparameters;
            row.n = n;
            row.repeat = rep;
            row.dataset_seed = dseed;
            row.run_seed = q_cfg.seed;
            row.policy_value = policy_value(mdp, trained.policy, kSolveTol);
            row.optimal_value = v_star;
            row.baseline_value = v_mu;
            row.success_tol = tol;
            row.success_rule = "optimal";
            row.success = recompute_success(row);
            row.support_rate = support_rate(trained.policy, filter, density);
            row.runtime_ms = elapsed_ms(start);
            slots[t].push_back(std::move(row));
        }
    });
    result.rows = flatten(slots);
    result.summary = summarize(result.rows);
    return result;
}

ExperimentResult run_cartpole(const ExperimentSpec& spec, std::size_t jobs) {
    validate(spec);
    ExperimentResult result;
    result.spec = spec;
    CartPoleDiscretization cfg;
    for (std::size_t d = 0; d < 4; ++d) cfg.dim_ranges[d] = {-spec.cartpole_ranges[d], spec.cartpole_ranges[d]};
    cfg.gamma = spec.gamma;
    validate(cfg);

    const TabularMdp model = build_cartpole_mdp(cfg, spec.sampling_episodes, derive_seed(spec.seed, {hash_label("model")}));
    const auto vi = exact_value_iteration(model, 1e-10);
    const std::uint64_t eval_seed = derive_seed(spec.seed, {hash_label("evaluation")});
    const auto evaluate = [&](const Policy& pi) { return cartpole_evaluate(cfg, pi, spec.eval_episodes, eval_seed); };
    const double vi_return = evaluate(vi.policy);
    if (vi_return < spec.calibration_floor)
        throw ConfigError("value iteration on the binned model returns " + format_real(vi_return) +
                          ", below calibration_floor " + format_real(spec.calibration_floor) +
                          "; widen or re-bin cartpole_ranges");
    result.facts = {{"model_states", std::to_string(model.num_states())}, {"value_iteration_return", format_real(vi_return)}};

    std::vector<Policy> behaviors;
    std::vector<double> behavior_returns;
    for (double eps : spec.epsilon) {
        behaviors.push_back(epsilon_greedy(vi.q, eps));
        behavior_returns.push_back(evaluate(behaviors.back()));
        result.facts.emplace_back("behavior_return_eps_" + format_real(eps), format_real(behavior_returns.back()));
    }

    const auto variants = expand_variants(spec);
    const std::size_t per_eps = spec.n.size() * spec.repeats;
    const std::size_t tasks = spec.epsilon.size() * per_eps;
    std::vector<std::vector<ResultRow>> slots(tasks);
    std::vector<std::vector<CurveRow>> curve_slots(tasks);
    parallel_for(tasks, jobs, [&](std::size_t t) {
        const std::size_t e = t / per_eps;
        const std::size_t n = spec.n[(t % per_eps) / spec.repeats];
        const std::size_t rep = t % spec.repeats;
        const double eps = spec.epsilon[e];
        const std::uint64_t dseed = dataset_seed(spec.seed, "cartpole", n, eps, rep);
        const Dataset data = collect_cartpole_dataset(cfg, behaviors[e], n, dseed, "epsilon_greedy");
        const DensityEstimate density = estimate_density(data, model.num_states(), model.num_actions());
        const SupportFilter default_filter = build_filter(density, spec.b.front().resolve(n));
        for (const Variant& v : variants) {
            const auto start = std::chrono::steady_clock::now();
            const SupportFilter filter = v.has_threshold ? build_filter(density, v.threshold.resolve(n)) : default_filter;
            auto q_cfg = AlgorithmConfig::q_iteration(spec.gamma, spec.q_iterations);
            q_cfg.seed = run_seed(spec.seed, v.algorithm, v.hyperparameters, n, eps, rep);
            q_cfg.evaluator = evaluate;
            q_cfg.eval_every = spec.eval_every;
            auto pi_cfg = AlgorithmConfig::policy_iteration(spec.gamma);
            pi_cfg.seed = q_cfg.seed;
            pi_cfg.evaluator = evaluate;
            const Trained trained = train(v, data, density, filter, q_cfg, pi_cfg);
            ResultRow row;
            row.experiment = to_string(spec.experiment);
            row.environment = "cartpole";
            row.algorithm = v.algorithm;
            row.hyperparameters = v.hyperparameters;
            row.n = n;
            row.epsilon = eps;
            row.repeat = rep;
            row.dataset_seed = dseed;
            row.run_seed = q_cfg.seed;
            row.policy_value = evaluate(trained.policy);
            row.optimal_value = vi_return;
            row.baseline_value = behavior_returns[e];
            row.success_tol = spec.success_tol;
            row.success_rule = "optimal";
            row.success = recompute_success(row);
            row.support_rate = support_rate(trained.policy, filter, density);
            row.runtime_ms = elapsed_ms(start);
            for (std::size_t k = 0; k < trained.trace.values.size(); ++k)
                curve_slots[t].push_back({eps, v.algorithm, v.hyperparameters, n, rep,
                                          trained.trace.value_iterations[k], trained.trace.values[k]});
            slots[t].push_back(std::move(row));
        }
    });
    result.rows = flatten(slots);
    result.curves = flatten(curve_slots);
    result.summary = summarize(result.rows);

    // Ablation over the MBS-QI thresholds.
    std::vector<double> eps_axis, best_b_axis;
    for (double eps : spec.epsilon) {
        std::vector<AblationRow> group;
        for (const Threshold& t : spec.b) {
            const std::string hyper = "b=" + t.to_string();
            std::vector<double> vals;
            for (const ResultRow& r : result.rows)
                if (r.algorithm == "mbs_qi" && r.hyperparameters == hyper && r.epsilon == eps) vals.push_back(r.policy_value);
            if (vals.empty()) continue;
            group.push_back({eps, t.to_string(), t.resolve(spec.n.front()), vals.size(), mean(vals), population_std(vals), false});
        }
        if (group.empty()) continue;
        std::size_t best = 0;
        for (std::size_t i = 1; i < group.size(); ++i)
            if (group[i].value_mean > group[best].value_mean) best = i;
        group[best].best = true;
        eps_axis.push_back(eps);
        best_b_axis.push_back(group[best].b);
        for (auto& row : group) result.ablation.push_back(std::move(row));
    }
    result.ablation_rank_correlation = spearman(eps_axis, best_b_axis);
    return result;
}

ExperimentResult run_safe_improve(const ExperimentSpec& spec, std::size_t jobs) {
    validate(spec);
    ExperimentResult result;
    result.spec = spec;
    const std::size_t n = spec.n.front();
    std::vector<std::vector<ResultRow>> slots(spec.instances);
    parallel_for(spec.instances, jobs, [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t iseed = derive_seed(spec.seed, {hash_label("instance"), i});
        const TabularMdp mdp = random_mdp(derive_seed(iseed, {1}), spec.num_states, spec.num_actions, spec.gamma);
        const Policy behavior = random_policy(derive_seed(iseed, {2}), spec.num_states, spec.num_actions);
        const OccupancyMeasure occ = occupancy(mdp, behavior, kSolveTol);
        double mu_min = std::numeric_limits<double>::infinity();
        for (double x : occ.eta.values())
            if (x > 0.0) mu_min = std::min(mu_min, x);
        const double b = spec.b_fraction * mu_min;
        const std::uint64_t dseed = derive_seed(iseed, {3});
        const Dataset data = generate_dataset(mdp, behavior, n, DatasetMode::iid_occupancy, dseed, "random_policy");
        const DensityEstimate density = estimate_density(data);
        const SupportFilter filter = build_filter(density, b);
        auto cfg = AlgorithmConfig::policy_iteration(mdp.gamma(), spec.pi_outer, spec.pi_inner);
        cfg.seed = derive_seed(iseed, {4});
        const RunResult run = mbs_pi(data, filter, cfg);
        const auto vi = exact_value_iteration(mdp, kSolveTol);

        ResultRow row;
        row.experiment = to_string(spec.experiment);
        row.environment = "random_mdp";
        row.algorithm = "mbs_pi";
        row.hyperparameters = "b=" + format_real(spec.b_fraction) + "*mu_min";
        row.n = n;
        row.repeat = i;
        row.dataset_seed = dseed;
        row.run_seed = cfg.seed;
        row.policy_value = policy_value(mdp, run.policy, kSolveTol);
        row.optimal_value = initial_value(mdp, vi.policy, vi.q);
        row.baseline_value = policy_value(mdp, behavior, kSolveTol);
        row.success_tol = spec.improve_tol * mdp.v_max();
        row.success_rule = "safe";
        row.success = recompute_success(row);
        row.support_rate = support_rate(run.policy, filter, density);
        row.runtime_ms = elapsed_ms(start);
        slots[i].push_back(std::move(row));
    });
    result.rows = flatten(slots);
    result.summary = summarize(result.rows);
    return result;
}

ExperimentResult run_verify_theory(const ExperimentSpec& spec, std::size_t jobs) {
    validate(spec);
    ExperimentResult result;
    result.spec = spec;
    const auto to_row = [](const CheckReport& c, std::size_t i, std::uint64_t seed, const TabularMdp& mdp) {
        return TheoryRow{c.check, i, seed, mdp.num_states(), mdp.num_actions(), mdp.gamma(),
                         c.lhs, c.rhs, c.residual, c.tol, c.passed};
    };

    std::vector<std::vector<TheoryRow>> inst(spec.instances);
    parallel_for(spec.instances, jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(spec.seed, {hash_label("instance"), i});
        const RandomInstance r = random_instance(seed, spec.max_states, spec.num_actions);
        inst[i].push_back(to_row(check_fixed_point(r.mdp, r.pi, r.filter, 1e-8), i, seed, r.mdp));
        inst[i].push_back(to_row(check_projection_value(r.mdp, r.pi, r.filter, 1e-9), i, seed, r.mdp));
        inst[i].push_back(to_row(check_escape_bound(r.mdp, r.pi, r.filter, 1e-9), i, seed, r.mdp));
    });

    std::vector<std::vector<TheoryRow>> ops(spec.operator_cases);
    parallel_for(spec.operator_cases, jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(spec.seed, {hash_label("operator"), i});
        const RandomInstance r = random_instance(seed, spec.max_states, spec.num_actions);
        const auto tables = random_tables(derive_seed(seed, {3}), 5, r.mdp.num_states() + 1, r.mdp.num_actions() + 1,
                                          r.mdp.v_max());
        ops[i].push_back(to_row(check_operator_projection_equiv(r.mdp, r.pi, r.filter, tables), i, seed, r.mdp));
    });

    // With b = 0 every pair is supported and the constrained runs must equal the unconstrained ones.
    std::vector<std::vector<TheoryRow>> red(spec.reduction_datasets);
    parallel_for(spec.reduction_datasets, jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(spec.seed, {hash_label("reduction"), i});
        const RandomInstance r = random_instance(seed, spec.max_states, spec.num_actions);
        const Dataset data =
            generate_dataset(r.mdp, r.pi, 2000, DatasetMode::iid_occupancy, derive_seed(seed, {3}), "random_policy");
        const SupportFilter zeta = build_filter(estimate_density(data, r.mdp.num_states(), r.mdp.num_actions()), 0.0);
        auto q_cfg = AlgorithmConfig::q_iteration(r.mdp.gamma(), 100);
        auto pi_cfg = AlgorithmConfig::policy_iteration(r.mdp.gamma(), 10, 50);
        q_cfg.record_q = pi_cfg.record_q = true;
        q_cfg.record_policies = pi_cfg.record_policies = true;
        const auto compare = [&](const std::string& name, const RunResult& x, const RunResult& y) {
            double diff = x.trace.q.size() == y.trace.q.size() ? 0.0 : std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < std::min(x.trace.q.size(), y.trace.q.size()); ++k)
                diff = std::max(diff, max_abs_diff(x.trace.q[k], y.trace.q[k]));
            const bool same = diff == 0.0 && x.trace.policies == y.trace.policies && x.policy == y.policy;
            red[i].push_back({name, i, seed, r.mdp.num_states(), r.mdp.num_actions(), r.mdp.gamma(),
                              static_cast<double>(x.trace.q.size()), static_cast<double>(y.trace.q.size()), diff, 0.0,
                              same});
        };
        compare("reduction_mbs_qi_fqi", mbs_qi(data, zeta, q_cfg), fqi(data, q_cfg));
        compare("reduction_mbs_pi_api", mbs_pi(data, zeta, pi_cfg), api(data, pi_cfg));
    });

    result.theory = flatten(inst);
    for (auto& row : flatten(ops)) result.theory.push_back(std::move(row));
    for (auto& row : flatten(red)) result.theory.push_back(std::move(row));
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs) {
    switch (spec.experiment) {
        case ExperimentKind::success_rate: return run_success_rate(spec, jobs);
        case ExperimentKind::cartpole: return run_cartpole(spec, jobs);
        case ExperimentKind::safe_improve: return run_safe_improve(spec, jobs);
        case ExperimentKind::verify_theory: return run_verify_theory(spec, jobs);
    }
    throw SpecError("unknown experiment kind");
}

namespace {

void write_header(std::ostream& out, const ExperimentResult& result) {
    out << kResultsSchema << '\n';
    write_spec(out, result.spec, "# ");
    for (const auto& [k, v] : result.facts) out << "# " << k << " = " << v << '\n';
}

const char* flag(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_rows_csv(std::ostream& out, const ExperimentResult& result) {
    write_header(out, result);
    out << "experiment,environment,algorithm,hyperparameters,n,epsilon,repeat,dataset_seed,run_seed,policy_value,"
           "optimal_value,baseline_value,success_tol,success_rule,success,support_rate\n";
    for (const ResultRow& r : result.rows) {
        out << r.experiment << ',' << r.environment << ',' << r.algorithm << ',' << r.hyperparameters << ',' << r.n
            << ',' << format_real(r.epsilon) << ',' << r.repeat << ',' << r.dataset_seed << ',' << r.run_seed << ','
            << format_real(r.policy_value) << ',' << format_real(r.optimal_value) << ','
            << format_real(r.baseline_value) << ',' << format_real(r.success_tol) << ',' << r.success_rule << ','
            << flag(r.success) << ',' << format_real(r.support_rate) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
    write_header(out, result);
    out << "environment,algorithm,hyperparameters,n,epsilon,runs,success_rate,success_std,value_mean,value_std\n";
    for (const SummaryRow& s : result.summary) {
        out << s.environment << ',' << s.algorithm << ',' << s.hyperparameters << ',' << s.n << ','
            << format_real(s.epsilon) << ',' << s.runs << ',' << format_real(s.success_rate) << ','
            << format_real(s.success_std) << ',' << format_real(s.value_mean) << ',' << format_real(s.value_std)
            << '\n';
    }
}

void write_timing_csv(std::ostream& out, const ExperimentResult& result) {
    out << "algorithm,hyperparameters,n,epsilon,repeat,runtime_ms\n";
    for (const ResultRow& r : result.rows) {
        out << r.algorithm << ',' << r.hyperparameters << ',' << r.n << ',' << format_real(r.epsilon) << ','
            << r.repeat << ',' << format_real(r.runtime_ms) << '\n';
    }
}

void write_curves_csv(std::ostream& out, const ExperimentResult& result) {
    write_header(out, result);
    out << "epsilon,algorithm,hyperparameters,n,repeat,iteration,value\n";
    for (const CurveRow& c : result.curves) {
        out << format_real(c.epsilon) << ',' << c.algorithm << ',' << c.hyperparameters << ',' << c.n << ','
            << c.repeat << ',' << c.iteration << ',' << format_real(c.value) << '\n';
    }
}

void write_ablation_csv(std::ostream& out, const ExperimentResult& result) {
    write_header(out, result);
    out << "# rank_correlation_epsilon_best_b = " << format_real(result.ablation_rank_correlation) << '\n';
    out << "epsilon,threshold,b,runs,value_mean,value_std,best\n";
    for (const AblationRow& a : result.ablation) {
        out << format_real(a.epsilon) << ',' << a.threshold << ',' << format_real(a.b) << ',' << a.runs << ','
            << format_real(a.value_mean) << ',' << format_real(a.value_std) << ',' << flag(a.best) << '\n';
    }
}

void write_theory_csv(std::ostream& out, const ExperimentResult& result) {
    write_header(out, result);
    out << "check,instance,seed,states,actions,gamma,lhs,rhs,residual,tol,passed\n";
    for (const TheoryRow& t : result.theory) {
        out << t.check << ',' << t.instance << ',' << t.seed << ',' << t.states << ',' << t.actions << ','
            << format_real(t.gamma) << ',' << format_real(t.lhs) << ',' << format_real(t.rhs) << ','
            << format_real(t.residual) << ',' << format_real(t.tol) << ',' << flag(t.passed) << '\n';
    }
}

std::vector<std::filesystem::path> write_results(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path main = dir / output_name(result.spec);
    const std::string stem = main.stem().string();
    std::vector<std::filesystem::path> written;
    const auto emit = [&](const std::filesystem::path& path, void (*fn)(std::ostream&, const ExperimentResult&)) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open '" + path.string() + "' for writing");
        fn(out, result);
        if (!out) throw Error("failed writing '" + path.string() + "'");
        written.push_back(path);
    };
    if (result.spec.experiment == ExperimentKind::verify_theory) {
        emit(main, write_theory_csv);
        return written;
    }
    emit(main, write_rows_csv);
    emit(dir / (stem + "_summary.csv"), write_summary_csv);
    emit(dir / (stem + "_timing.csv"), write_timing_csv);
    if (result.spec.experiment == ExperimentKind::cartpole) {
        emit(dir / (stem + "_curves.csv"), write_curves_csv);
        emit(dir / (stem + "_ablation.csv"), write_ablation_csv);
    }
    return written;
}

}  // namespace mbs
