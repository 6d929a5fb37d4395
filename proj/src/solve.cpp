#include "mbs/solve.hpp"

#include "mbs/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mbs {

namespace {

void check_shapes(const TabularMdp& mdp, const Policy& pi) {
    if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions()) {
        throw ConfigError("policy shape does not match the MDP");
    }
}

void check_shapes(const TabularMdp& mdp, const QTable& f) {
    if (f.num_states() != mdp.num_states() || f.num_actions() != mdp.num_actions()) {
        throw ConfigError("Q table shape does not match the MDP");
    }
}

double backup(const TabularMdp& mdp, StateId s, ActionId a, const std::vector<double>& next_values) {
    double expected = 0.0;
    for (const auto& o : mdp.successors(s, a)) expected += o.prob * next_values[o.state];
    return mdp.reward_mean(s, a) + mdp.gamma() * expected;
}

std::vector<double> max_values(const QTable& f) {
    std::vector<double> v(f.num_states());
    for (StateId s = 0; s < f.num_states(); ++s) {
        const auto row = f.row(s);
        v[s] = *std::max_element(row.begin(), row.end());
    }
    return v;
}

// Shared loop for both fixed-point solvers: Q <- op(Q) until the residual
// ||op(Q) - Q|| falls to tol; returns the last Q whose residual was checked.
template <class Op>
QTable iterate_to_fixed_point(const TabularMdp& mdp, Op op, double tol, std::size_t max_iterations,
                              std::size_t* iterations_out) {
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
    QTable q(mdp.num_states(), mdp.num_actions(), 0.0);
    for (std::size_t it = 0; it < max_iterations; ++it) {
        QTable next = op(q);
        double residual = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double x = next.values()[i];
            if (!std::isfinite(x)) throw NumericError("non-finite value during fixed-point iteration");
            residual = std::max(residual, std::abs(x - q.values()[i]));
        }
        if (residual <= tol) {
            if (iterations_out) *iterations_out = it;
            return q;
        }
        q = std::move(next);
    }
    throw NumericError("fixed-point iteration did not reach tolerance within the iteration budget");
}

}  // namespace

QTable bellman_evaluation(const TabularMdp& mdp, const Policy& pi, const QTable& f) {
    check_shapes(mdp, pi);
    check_shapes(mdp, f);
    const std::vector<double> v = state_values(f, pi);
    QTable out(mdp.num_states(), mdp.num_actions());
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a) out(s, a) = backup(mdp, s, a, v);
    return out;
}

QTable bellman_optimality(const TabularMdp& mdp, const QTable& f) {
    check_shapes(mdp, f);
    const std::vector<double> v = max_values(f);
    QTable out(mdp.num_states(), mdp.num_actions());
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a) out(s, a) = backup(mdp, s, a, v);
    return out;
}

std::vector<double> state_values(const QTable& q, const Policy& pi) {
    if (!q.same_shape(pi.probabilities())) throw ConfigError("policy shape does not match the Q table");
    std::vector<double> v(q.num_states(), 0.0);
    for (StateId s = 0; s < q.num_states(); ++s) {
        if (pi.is_deterministic()) {
            v[s] = q(s, pi.actions()[s]);
            continue;
        }
        double acc = 0.0;
        for (ActionId a = 0; a < q.num_actions(); ++a) acc += pi.prob(s, a) * q(s, a);
        v[s] = acc;
    }
    return v;
}

QTable exact_policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol, std::size_t max_iterations) {
    check_shapes(mdp, pi);
    return iterate_to_fixed_point(
        mdp, [&](const QTable& q) { return bellman_evaluation(mdp, pi, q); }, tol, max_iterations, nullptr);
}

ValueIterationResult exact_value_iteration(const TabularMdp& mdp, double tol, std::size_t max_iterations) {
    ValueIterationResult result;
    result.q = iterate_to_fixed_point(
        mdp, [&](const QTable& q) { return bellman_optimality(mdp, q); }, tol, max_iterations, &result.iterations);
    result.policy = greedy_policy(result.q);
    return result;
}

double initial_value(const TabularMdp& mdp, const Policy& pi, const QTable& q) {
    const std::vector<double> v = state_values(q, pi);
    double total = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s) total += mdp.initial_dist()[s] * v[s];
    return total;
}

double policy_value(const TabularMdp& mdp, const Policy& pi, double tol) {
    return initial_value(mdp, pi, exact_policy_evaluation(mdp, pi, tol));
}

namespace {

std::vector<double> propagate(const TabularMdp& mdp, const Policy& pi, const std::vector<double>& d) {
    std::vector<double> next(mdp.num_states(), 0.0);
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        if (d[s] == 0.0) continue;
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const double w = d[s] * pi.prob(s, a);
            if (w == 0.0) continue;
            for (const auto& o : mdp.successors(s, a)) next[o.state] += w * o.prob;
        }
    }
    return next;
}

}  // namespace

OccupancyMeasure occupancy(const TabularMdp& mdp, const Policy& pi, double tol) {
    check_shapes(mdp, pi);
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
    const double gamma = mdp.gamma();

    // A zero-reward MDP still needs a meaningful horizon, hence the floor of 1.
    const double scale = std::max(mdp.v_max(), 1.0);
    std::size_t horizon = 1;
    if (gamma > 0.0 && scale > tol) {
        horizon = static_cast<std::size_t>(std::ceil(std::log(tol / scale) / std::log(gamma)));
        horizon = std::max<std::size_t>(horizon, 1);
    }

    OccupancyMeasure out{Table(mdp.num_states(), mdp.num_actions(), 0.0), horizon};
    std::vector<double> d = mdp.initial_dist();
    double weight = 1.0 - gamma;
    for (std::size_t h = 0; h < horizon; ++h) {
        for (StateId s = 0; s < mdp.num_states(); ++s) {
            if (d[s] == 0.0) continue;
            for (ActionId a = 0; a < mdp.num_actions(); ++a) out.eta(s, a) += weight * d[s] * pi.prob(s, a);
        }
        if (h + 1 < horizon) d = propagate(mdp, pi, d);
        weight *= gamma;
    }
    double mass = 0.0;
    for (double x : out.eta.values()) mass += x;
    if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericError("occupancy has no mass");
    for (double& x : out.eta.values()) x /= mass;
    return out;
}

std::vector<Table> step_marginals(const TabularMdp& mdp, const Policy& pi, std::size_t horizon) {
    check_shapes(mdp, pi);
    std::vector<Table> out;
    out.reserve(horizon);
    std::vector<double> d = mdp.initial_dist();
    for (std::size_t h = 0; h < horizon; ++h) {
        Table t(mdp.num_states(), mdp.num_actions(), 0.0);
        for (StateId s = 0; s < mdp.num_states(); ++s)
            for (ActionId a = 0; a < mdp.num_actions(); ++a) t(s, a) = d[s] * pi.prob(s, a);
        out.push_back(std::move(t));
        if (h + 1 < horizon) d = propagate(mdp, pi, d);
    }
    return out;
}

std::vector<Transition> sample_episode(const TabularMdp& mdp, const Policy& pi, std::size_t max_steps,
                                       std::uint64_t rng_seed) {
    check_shapes(mdp, pi);
    if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
    Rng rng(rng_seed);
    std::vector<Transition> episode;
    StateId s = rng.categorical(mdp.initial_dist());
    std::vector<double> weights;
    for (std::size_t step = 0; step < max_steps && !mdp.is_terminal(s); ++step) {
        const ActionId a = pi.is_deterministic() ? pi.actions()[s] : rng.categorical(pi.row(s));
        const auto atoms = mdp.reward_dist(s, a);
        weights.clear();
        for (const auto& atom : atoms) weights.push_back(atom.prob);
        const double r = atoms[rng.categorical(weights)].value;
        const auto outcomes = mdp.successors(s, a);
        weights.clear();
        for (const auto& o : outcomes) weights.push_back(o.prob);
        const StateId next = outcomes[rng.categorical(weights)].state;
        episode.push_back({s, a, r, next});
        s = next;
    }
    return episode;
}

}  // namespace mbs
