#include "mbs/algorithms.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace mbs {

EmpiricalModel::EmpiricalModel(const Dataset& dataset)
    : num_states_(dataset.num_states), num_actions_(dataset.num_actions) {
    const std::size_t pairs = num_states_ * num_actions_;
    counts_.assign(pairs, 0);
    mean_reward_.assign(pairs, 0.0);
    visited_.assign(num_states_, 0);

    std::vector<std::pair<std::size_t, StateId>> keyed;
    keyed.reserve(dataset.n());
    std::vector<double> reward_sum(pairs, 0.0);
    for (const auto& t : dataset.transitions) {
        if (t.s >= num_states_ || t.s_next >= num_states_ || t.a >= num_actions_) {
            throw ConfigError("dataset transition out of range");
        }
        const std::size_t i = t.s * num_actions_ + t.a;
        ++counts_[i];
        reward_sum[i] += t.r;
        visited_[t.s] = 1;
        keyed.emplace_back(i, t.s_next);
    }
    std::sort(keyed.begin(), keyed.end());

    offsets_.assign(pairs + 1, 0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        if (counts_[i] > 0) mean_reward_[i] = reward_sum[i] / static_cast<double>(counts_[i]);
        const double c = static_cast<double>(counts_[i]);
        while (k < keyed.size() && keyed[k].first == i) {
            const StateId next = keyed[k].second;
            std::size_t run = 0;
            while (k < keyed.size() && keyed[k].first == i && keyed[k].second == next) {
                ++run;
                ++k;
            }
            outcomes_.push_back({next, static_cast<double>(run) / c});
        }
        offsets_[i + 1] = outcomes_.size();
    }
}

namespace {

void check_shape(const QTable& f, const EmpiricalModel& model) {
    if (f.num_states() != model.num_states() || f.num_actions() != model.num_actions()) {
        throw ConfigError("Q table shape does not match the dataset");
    }
}

void check_shape(const SupportFilter& filter, const EmpiricalModel& model) {
    if (filter.num_states() != model.num_states() || filter.num_actions() != model.num_actions()) {
        throw ConfigError("support filter shape does not match the dataset");
    }
}

void check_shape(const Policy& pi, const EmpiricalModel& model) {
    if (pi.num_states() != model.num_states() || pi.num_actions() != model.num_actions()) {
        throw ConfigError("policy shape does not match the dataset");
    }
}

// Exact least-squares fit over the tabular class: per-pair mean of r + gamma V(s').
QTable regress(const EmpiricalModel& model, const std::vector<double>& next_values, double gamma) {
    QTable out(model.num_states(), model.num_actions(), kUnsampledValue);
    for (StateId s = 0; s < model.num_states(); ++s) {
        for (ActionId a = 0; a < model.num_actions(); ++a) {
            if (model.count(s, a) == 0) continue;
            double expected = 0.0;
            for (const auto& o : model.successors(s, a)) expected += o.prob * next_values[o.state];
            out(s, a) = model.mean_reward(s, a) + gamma * expected;
        }
    }
    return out;
}

}  // namespace

QTable constrained_eval_backup(const QTable& f, const Policy& pi, const EmpiricalModel& model,
                               const SupportFilter& filter, double gamma) {
    check_shape(f, model);
    check_shape(pi, model);
    check_shape(filter, model);
    std::vector<double> v(model.num_states(), 0.0);
    for (StateId s = 0; s < model.num_states(); ++s) {
        double acc = 0.0;
        for (ActionId a = 0; a < model.num_actions(); ++a) acc += pi.prob(s, a) * (filter(s, a) ? f(s, a) : 0.0);
        v[s] = acc;
    }
    return regress(model, v, gamma);
}

QTable constrained_eval_backup(const QTable& f, const Policy& pi, const Dataset& dataset,
                               const SupportFilter& filter, double gamma) {
    return constrained_eval_backup(f, pi, EmpiricalModel(dataset), filter, gamma);
}

QTable constrained_opt_backup(const QTable& f, const EmpiricalModel& model, const SupportFilter& filter, double gamma) {
    check_shape(f, model);
    check_shape(filter, model);
    std::vector<double> v(model.num_states(), 0.0);
    for (StateId s = 0; s < model.num_states(); ++s) {
        double best = filter(s, 0) ? f(s, 0) : 0.0;
        for (ActionId a = 1; a < model.num_actions(); ++a) best = std::max(best, filter(s, a) ? f(s, a) : 0.0);
        v[s] = best;
    }
    return regress(model, v, gamma);
}

QTable constrained_opt_backup(const QTable& f, const Dataset& dataset, const SupportFilter& filter, double gamma) {
    return constrained_opt_backup(f, EmpiricalModel(dataset), filter, gamma);
}

QTable empirical_eval_backup(const QTable& f, const Policy& pi, const EmpiricalModel& model, double gamma) {
    check_shape(f, model);
    check_shape(pi, model);
    std::vector<double> v(model.num_states(), 0.0);
    for (StateId s = 0; s < model.num_states(); ++s) {
        double acc = 0.0;
        for (ActionId a = 0; a < model.num_actions(); ++a) acc += pi.prob(s, a) * f(s, a);
        v[s] = acc;
    }
    return regress(model, v, gamma);
}

QTable empirical_opt_backup(const QTable& f, const EmpiricalModel& model, double gamma) {
    check_shape(f, model);
    std::vector<double> v(model.num_states(), 0.0);
    for (StateId s = 0; s < model.num_states(); ++s) {
        const auto row = f.row(s);
        v[s] = *std::max_element(row.begin(), row.end());
    }
    return regress(model, v, gamma);
}

AlgorithmConfig AlgorithmConfig::q_iteration(double gamma, std::size_t iterations) {
    AlgorithmConfig cfg;
    cfg.gamma = gamma;
    cfg.outer_iters = iterations;
    return cfg;
}

AlgorithmConfig AlgorithmConfig::policy_iteration(double gamma, std::size_t outer, std::size_t inner) {
    AlgorithmConfig cfg;
    cfg.gamma = gamma;
    cfg.outer_iters = outer;
    cfg.inner_iters = inner;
    return cfg;
}

void AlgorithmConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (outer_iters < 1) throw ConfigError("outer iterations T must be at least 1");
    if (inner_iters < 1) throw ConfigError("inner iterations K must be at least 1");
    if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    out << "iteration,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < trace.values.size(); ++i) out << trace.value_iterations[i] << ',' << trace.values[i] << "\n";
}

ActionId supported_argmax(std::span<const double> row, const SupportFilter& filter, StateId s) {
    bool found = false;
    ActionId best = 0;
    for (ActionId a = 0; a < row.size(); ++a) {
        if (!filter(s, a)) continue;
        if (!found || row[a] > row[best]) {
            best = a;
            found = true;
        }
    }
    return best;
}

namespace {

void record(RunTrace& trace, const AlgorithmConfig& cfg, std::size_t iteration, const QTable& q,
            const std::function<Policy()>& make_policy) {
    if (cfg.record_q) trace.q.push_back(q);
    const bool evaluate = cfg.evaluator && (iteration % cfg.eval_every == 0 || iteration == cfg.outer_iters);
    if (!cfg.record_policies && !evaluate) return;
    Policy pi = make_policy();
    if (evaluate) {
        trace.value_iterations.push_back(iteration);
        trace.values.push_back(cfg.evaluator(pi));
    }
    if (cfg.record_policies) trace.policies.push_back(std::move(pi));
}

template <class Backup, class Extract>
RunResult q_iteration(const EmpiricalModel& model, const AlgorithmConfig& cfg, Backup backup, Extract extract) {
    cfg.validate();
    RunResult result;
    QTable f(model.num_states(), model.num_actions(), 0.0);
    for (std::size_t t = 1; t <= cfg.outer_iters; ++t) {
        f = backup(f);
        record(result.trace, cfg, t, f, [&] { return extract(f); });
    }
    result.policy = extract(f);
    result.q = std::move(f);
    return result;
}

template <class Backup, class Improve>
RunResult policy_iteration(const EmpiricalModel& model, const AlgorithmConfig& cfg, Backup backup, Improve improve) {
    cfg.validate();
    RunResult result;
    Policy pi = Policy::uniform(model.num_states(), model.num_actions());
    QTable f;
    for (std::size_t t = 1; t <= cfg.outer_iters; ++t) {
        f = QTable(model.num_states(), model.num_actions(), 0.0);
        for (std::size_t k = 0; k < cfg.inner_iters; ++k) f = backup(f, pi);
        pi = improve(f);
        record(result.trace, cfg, t, f, [&] { return pi; });
    }
    result.policy = std::move(pi);
    result.q = std::move(f);
    return result;
}

// Greedy action at states that appear in the data, action 0 elsewhere.
template <class Choose>
Policy improve_on_data(const EmpiricalModel& model, const QTable& f, Choose choose) {
    std::vector<ActionId> actions(model.num_states(), 0);
    for (StateId s = 0; s < model.num_states(); ++s) {
        if (model.visited(s)) actions[s] = choose(s, f.row(s));
    }
    return Policy::deterministic(std::move(actions), model.num_actions());
}

Policy supported_greedy(const QTable& f, const SupportFilter& filter) {
    std::vector<ActionId> actions(f.num_states());
    for (StateId s = 0; s < f.num_states(); ++s) actions[s] = supported_argmax(f.row(s), filter, s);
    return Policy::deterministic(std::move(actions), f.num_actions());
}

SupportFilter bcql_allowed(const DensityEstimate& density, double tau) {
    std::vector<std::uint8_t> allowed(density.conditional.size());
    for (std::size_t i = 0; i < allowed.size(); ++i) allowed[i] = density.conditional.values()[i] > tau ? 1 : 0;
    return {density.num_states(), density.num_actions(), tau, std::move(allowed)};
}

}  // namespace

RunResult mbs_qi(const Dataset& dataset, const SupportFilter& filter, const AlgorithmConfig& cfg) {
    const EmpiricalModel model(dataset);
    check_shape(filter, model);
    return q_iteration(
        model, cfg, [&](const QTable& f) { return constrained_opt_backup(f, model, filter, cfg.gamma); },
        [&](const QTable& f) { return supported_greedy(f, filter); });
}

RunResult fqi(const Dataset& dataset, const AlgorithmConfig& cfg) {
    const EmpiricalModel model(dataset);
    return q_iteration(
        model, cfg, [&](const QTable& f) { return empirical_opt_backup(f, model, cfg.gamma); },
        [](const QTable& f) { return greedy_policy(f); });
}

RunResult mbs_pi(const Dataset& dataset, const SupportFilter& filter, const AlgorithmConfig& cfg) {
    const EmpiricalModel model(dataset);
    check_shape(filter, model);
    return policy_iteration(
        model, cfg,
        [&](const QTable& f, const Policy& pi) { return constrained_eval_backup(f, pi, model, filter, cfg.gamma); },
        [&](const QTable& f) {
            return improve_on_data(model, f,
                                   [&](StateId s, std::span<const double> row) { return supported_argmax(row, filter, s); });
        });
}

RunResult api(const Dataset& dataset, const AlgorithmConfig& cfg) {
    const EmpiricalModel model(dataset);
    return policy_iteration(
        model, cfg, [&](const QTable& f, const Policy& pi) { return empirical_eval_backup(f, pi, model, cfg.gamma); },
        [&](const QTable& f) {
            return improve_on_data(model, f, [](StateId, std::span<const double> row) { return argmax_lowest(row); });
        });
}

RunResult bcql(const Dataset& dataset, const DensityEstimate& density, double tau, const AlgorithmConfig& cfg) {
    if (!(tau >= 0.0)) throw ConfigError("BCQL threshold must be non-negative");
    const EmpiricalModel model(dataset);
    const SupportFilter allowed = bcql_allowed(density, tau);
    check_shape(allowed, model);
    return q_iteration(
        model, cfg,
        [&](const QTable& f) {
            std::vector<double> v(model.num_states(), 0.0);
            for (StateId s = 0; s < model.num_states(); ++s) {
                bool any = false;
                double best = 0.0;
                for (ActionId a = 0; a < model.num_actions(); ++a) {
                    if (!allowed(s, a)) continue;
                    best = any ? std::max(best, f(s, a)) : f(s, a);
                    any = true;
                }
                v[s] = best;
            }
            return regress(model, v, cfg.gamma);
        },
        [&](const QTable& f) { return supported_greedy(f, allowed); });
}

Policy spibb_policy(const QTable& f, const DensityEstimate& density, const SupportFilter& filter) {
    Table probs(f.num_states(), f.num_actions(), 0.0);
    for (StateId s = 0; s < f.num_states(); ++s) {
        if (!filter.any_supported(s)) {
            for (ActionId a = 0; a < f.num_actions(); ++a) probs(s, a) = density.conditional(s, a);
            continue;
        }
        double kept = 0.0;
        for (ActionId a = 0; a < f.num_actions(); ++a) {
            if (filter(s, a)) continue;
            probs(s, a) = density.conditional(s, a);
            kept += probs(s, a);
        }
        probs(s, supported_argmax(f.row(s), filter, s)) = 1.0 - kept;
    }
    return Policy::stochastic(std::move(probs));
}

RunResult spibb(const Dataset& dataset, const DensityEstimate& density, const SupportFilter& filter,
                const AlgorithmConfig& cfg) {
    const EmpiricalModel model(dataset);
    check_shape(filter, model);
    if (density.num_states() != model.num_states() || density.num_actions() != model.num_actions()) {
        throw ConfigError("density shape does not match the dataset");
    }
    return q_iteration(
        model, cfg,
        [&](const QTable& f) {
            std::vector<double> v(model.num_states(), 0.0);
            for (StateId s = 0; s < model.num_states(); ++s) {
                if (!filter.any_supported(s)) {
                    double acc = 0.0;
                    for (ActionId a = 0; a < model.num_actions(); ++a) acc += density.conditional(s, a) * f(s, a);
                    v[s] = acc;
                    continue;
                }
                double kept = 0.0;
                double acc = 0.0;
                for (ActionId a = 0; a < model.num_actions(); ++a) {
                    if (filter(s, a)) continue;
                    kept += density.conditional(s, a);
                    acc += density.conditional(s, a) * f(s, a);
                }
                v[s] = acc + (1.0 - kept) * f(s, supported_argmax(f.row(s), filter, s));
            }
            return regress(model, v, cfg.gamma);
        },
        [&](const QTable& f) { return spibb_policy(f, density, filter); });
}

Policy behavior_cloning(const Dataset& dataset) {
    return Policy::stochastic(estimate_density(dataset).conditional);
}

}  // namespace mbs
