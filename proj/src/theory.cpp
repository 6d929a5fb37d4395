#include "mbs/theory.hpp"

#include "mbs/rng.hpp"
#include "mbs/solve.hpp"

#include <algorithm>
#include <cmath>

namespace mbs {

AugmentedMdp augment(const TabularMdp& base) {
    const std::size_t S = base.num_states();
    const std::size_t A = base.num_actions();
    MdpBuilder b(S + 1, A + 1, base.gamma());
    b.name(base.name() + "_augmented").r_max(base.r_max());
    std::vector<double> rho = base.initial_dist();
    rho.push_back(0.0);
    b.initial(std::move(rho));
    for (StateId s = 0; s < S; ++s) {
        if (base.is_terminal(s)) b.terminal(s);
        for (ActionId a = 0; a < A; ++a) {
            const auto succ = base.successors(s, a);
            const auto atoms = base.reward_dist(s, a);
            b.transition(s, a, {succ.begin(), succ.end()});
            b.reward(s, a, {atoms.begin(), atoms.end()});
        }
        b.deterministic_transition(s, A, S).point_reward(s, A, 0.0);
    }
    b.terminal(S).absorbing(S);
    return {b.build(), S, A, S, A};
}

Policy lift_policy(const Policy& pi, const AugmentedMdp& aug) {
    if (pi.num_states() == aug.mdp.num_states() && pi.num_actions() == aug.mdp.num_actions()) return pi;
    if (pi.num_states() != aug.base_states || pi.num_actions() != aug.base_actions) {
        throw ConfigError("policy shape matches neither the base nor the augmented MDP");
    }
    Table probs(aug.mdp.num_states(), aug.mdp.num_actions(), 0.0);
    for (StateId s = 0; s < aug.base_states; ++s)
        for (ActionId a = 0; a < aug.base_actions; ++a) probs(s, a) = pi.prob(s, a);
    probs(aug.s_abs, aug.a_abs) = 1.0;
    return Policy::stochastic(std::move(probs));
}

SupportFilter extend_filter(const SupportFilter& filter, const AugmentedMdp& aug) {
    if (filter.num_states() == aug.mdp.num_states() && filter.num_actions() == aug.mdp.num_actions()) return filter;
    if (filter.num_states() != aug.base_states || filter.num_actions() != aug.base_actions) {
        throw ConfigError("filter shape matches neither the base nor the augmented MDP");
    }
    const std::size_t A = aug.mdp.num_actions();
    std::vector<std::uint8_t> indicator(aug.mdp.num_states() * A, 0);
    for (StateId s = 0; s < aug.base_states; ++s)
        for (ActionId a = 0; a < aug.base_actions; ++a) indicator[s * A + a] = filter(s, a) ? 1 : 0;
    return {aug.mdp.num_states(), A, filter.threshold(), std::move(indicator)};
}

Policy project_policy(const Policy& pi, const SupportFilter& filter) {
    if (pi.num_states() != filter.num_states() || pi.num_actions() != filter.num_actions()) {
        throw ConfigError("policy and filter shapes differ");
    }
    const std::size_t A = pi.num_actions();
    const ActionId a_abs = A - 1;
    Table probs(pi.num_states(), A, 0.0);
    for (StateId s = 0; s < pi.num_states(); ++s) {
        double escaped = 0.0;
        for (ActionId a = 0; a < A; ++a) {
            if (filter(s, a)) {
                probs(s, a) = pi.prob(s, a);
            } else {
                escaped += pi.prob(s, a);
            }
        }
        probs(s, a_abs) += escaped;
    }
    return Policy::stochastic(std::move(probs));
}

namespace {

void check_shapes(const TabularMdp& mdp, const SupportFilter& filter) {
    if (filter.num_states() != mdp.num_states() || filter.num_actions() != mdp.num_actions()) {
        throw ConfigError("filter shape does not match the MDP");
    }
}

QTable expected_backup(const TabularMdp& mdp, const std::vector<double>& v) {
    QTable out(mdp.num_states(), mdp.num_actions());
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            double expected = 0.0;
            for (const auto& o : mdp.successors(s, a)) expected += o.prob * v[o.state];
            out(s, a) = mdp.reward_mean(s, a) + mdp.gamma() * expected;
        }
    }
    return out;
}

double solve_tol(const TabularMdp& mdp, double tol) { return std::max(tol * (1.0 - mdp.gamma()) / 4.0, 1e-14); }

}  // namespace

QTable constrained_bellman_evaluation(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter,
                                      const QTable& f) {
    check_shapes(mdp, filter);
    if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions()) {
        throw ConfigError("policy shape does not match the MDP");
    }
    std::vector<double> v(mdp.num_states(), 0.0);
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            if (filter(s, a)) v[s] += pi.prob(s, a) * f(s, a);
    return expected_backup(mdp, v);
}

QTable constrained_bellman_optimality(const TabularMdp& mdp, const SupportFilter& filter, const QTable& f) {
    check_shapes(mdp, filter);
    std::vector<double> v(mdp.num_states(), 0.0);
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            if (filter(s, a)) v[s] = std::max(v[s], f(s, a));
    return expected_backup(mdp, v);
}

QTable constrained_fixed_point(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol) {
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
    QTable q(mdp.num_states(), mdp.num_actions(), 0.0);
    for (std::size_t it = 0; it < kDefaultMaxIterations; ++it) {
        QTable next = constrained_bellman_evaluation(mdp, pi, filter, q);
        double residual = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (!std::isfinite(next.values()[i])) throw NumericError("non-finite value in constrained evaluation");
            residual = std::max(residual, std::abs(next.values()[i] - q.values()[i]));
        }
        if (residual <= tol) return q;
        q = std::move(next);
    }
    throw NumericError("constrained evaluation did not converge within the iteration budget");
}

double escape_probability(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter) {
    check_shapes(mdp, filter);
    const OccupancyMeasure eta = occupancy(mdp, pi, 1e-12);
    double escaped = 0.0;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            if (!filter(s, a)) escaped += eta.eta(s, a);
    return std::min(escaped, 1.0);
}

CheckReport check_fixed_point(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol) {
    const AugmentedMdp aug = augment(mdp);
    const Policy lifted = lift_policy(pi, aug);
    const SupportFilter zeta = extend_filter(filter, aug);
    const double inner = solve_tol(aug.mdp, tol);

    const QTable fixed = constrained_fixed_point(aug.mdp, lifted, zeta, inner);
    const QTable q_proj = exact_policy_evaluation(aug.mdp, project_policy(lifted, zeta), inner);
    double residual = 0.0;
    for (StateId s = 0; s < aug.base_states; ++s)
        for (ActionId a = 0; a < aug.base_actions; ++a) residual = std::max(residual, std::abs(fixed(s, a) - q_proj(s, a)));
    return {"fixed_point", 0.0, 0.0, residual, tol, residual <= tol};
}

CheckReport check_projection_value(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol) {
    const AugmentedMdp aug = augment(mdp);
    const Policy lifted = lift_policy(pi, aug);
    const SupportFilter zeta = extend_filter(filter, aug);
    const double inner = solve_tol(aug.mdp, tol);

    const double v_proj = policy_value(aug.mdp, project_policy(lifted, zeta), inner);
    const double v_pi = policy_value(aug.mdp, lifted, inner);
    const double escape = escape_probability(aug.mdp, lifted, zeta);
    CheckReport r{"projection_value", v_proj, v_pi, v_proj - v_pi, tol, v_proj <= v_pi + tol};
    if (escape == 0.0) {
        r.residual = std::abs(v_proj - v_pi);
        r.passed = r.residual <= tol;
    }
    return r;
}

CheckReport check_escape_bound(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol) {
    if (pi.num_states() != mdp.num_states() || pi.num_actions() != mdp.num_actions()) {
        throw ConfigError("the escape bound takes a policy on the base MDP");
    }
    const AugmentedMdp aug = augment(mdp);
    const SupportFilter zeta = extend_filter(filter, aug);
    const double inner = solve_tol(mdp, tol);

    const double v_base = policy_value(mdp, pi, inner);
    const double v_proj = policy_value(aug.mdp, project_policy(lift_policy(pi, aug), zeta), inner);
    const double escape = escape_probability(mdp, pi, filter);
    const double bound = v_proj + mdp.v_max() * escape / (1.0 - mdp.gamma());
    return {"escape_bound", v_base, bound, v_base - bound, tol, v_base <= bound + tol};
}

CheckReport check_operator_projection_equiv(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter,
                                            const std::vector<QTable>& tables) {
    constexpr double kTol = 1e-12;
    const AugmentedMdp aug = augment(mdp);
    const Policy lifted = lift_policy(pi, aug);
    const SupportFilter zeta = extend_filter(filter, aug);
    const Policy projected = project_policy(lifted, zeta);
    double residual = 0.0;
    for (const QTable& f : tables) {
        residual = std::max(residual, max_abs_diff(constrained_bellman_evaluation(aug.mdp, lifted, zeta, f),
                                                   constrained_bellman_evaluation(aug.mdp, projected, zeta, f)));
    }
    return {"operator_projection_equiv", 0.0, 0.0, residual, kTol, residual <= kTol};
}

MembershipReport membership(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double epsilon_zeta) {
    MembershipReport r;
    r.escape_prob = escape_probability(mdp, pi, filter);
    r.epsilon_zeta = epsilon_zeta;
    r.member = r.escape_prob <= epsilon_zeta;
    return r;
}

TabularMdp random_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions, double gamma) {
    Rng rng(seed);
    MdpBuilder b(num_states, num_actions, gamma);
    b.name("random").r_max(1.0).initial(rng.dirichlet_ones(num_states));
    for (StateId s = 0; s < num_states; ++s) {
        for (ActionId a = 0; a < num_actions; ++a) {
            const std::vector<double> row = rng.dirichlet_ones(num_states);
            std::vector<Outcome> outcomes;
            for (StateId next = 0; next < num_states; ++next) outcomes.push_back({next, row[next]});
            b.transition(s, a, std::move(outcomes)).point_reward(s, a, rng.uniform());
        }
    }
    return b.build();
}

Policy random_policy(std::uint64_t seed, std::size_t num_states, std::size_t num_actions) {
    Rng rng(seed);
    Table probs(num_states, num_actions);
    for (StateId s = 0; s < num_states; ++s) {
        const std::vector<double> row = rng.dirichlet_ones(num_actions);
        for (ActionId a = 0; a < num_actions; ++a) probs(s, a) = row[a];
    }
    return Policy::stochastic(std::move(probs));
}

RandomInstance random_instance(std::uint64_t seed, std::size_t max_states, std::size_t num_actions) {
    if (max_states < 2 || num_actions < 1) throw ConfigError("random instances need at least 2 states and 1 action");
    Rng rng(seed);
    const std::size_t S = 2 + static_cast<std::size_t>(rng.below(max_states - 1));
    constexpr double kGammas[] = {0.5, 0.9, 0.99};
    const double gamma = kGammas[rng.below(3)];
    const double keep = rng.uniform(0.3, 1.0);
    std::vector<std::uint8_t> indicator(S * num_actions);
    for (auto& z : indicator) z = rng.bernoulli(keep) ? 1 : 0;
    return {random_mdp(derive_seed(seed, {1}), S, num_actions, gamma),
            random_policy(derive_seed(seed, {2}), S, num_actions),
            SupportFilter(S, num_actions, 0.0, std::move(indicator))};
}

std::vector<QTable> random_tables(std::uint64_t seed, std::size_t count, std::size_t num_states,
                                  std::size_t num_actions, double scale) {
    Rng rng(seed);
    std::vector<QTable> out;
    for (std::size_t i = 0; i < count; ++i) {
        QTable f(num_states, num_actions);
        for (double& x : f.values()) x = rng.uniform(0.0, scale);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace mbs
