#pragma once

#include "mbs/dataset.hpp"
#include "mbs/mdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mbs {

/**
 * Auxiliary MDP M': the base MDP plus an absorbing action a_abs in every state
 * that moves to a new zero-reward self-looping state s_abs.
 */
struct AugmentedMdp {
    TabularMdp mdp;
    std::size_t base_states = 0;
    std::size_t base_actions = 0;
    StateId s_abs = 0;   // = base_states
    ActionId a_abs = 0;  // = base_actions
};

AugmentedMdp augment(const TabularMdp& base);

/// Base policy as a policy on M' (no mass on a_abs; a_abs with probability 1 at s_abs).
/// A policy already shaped for M' is returned unchanged.
Policy lift_policy(const Policy& pi, const AugmentedMdp& aug);

/// zeta on M': zero on the s_abs row and the a_abs column.
SupportFilter extend_filter(const SupportFilter& filter, const AugmentedMdp& aug);

/**
 * (Xi pi)(a|s) = zeta(s,a) pi(a|s) for base actions and
 * (Xi pi)(a_abs|s) = sum_a' pi(a'|s) (1 - zeta(s,a')). pi and filter live on M'.
 */
Policy project_policy(const Policy& pi, const SupportFilter& filter);

/// Exact-expectation zeta-constrained operators on a known model.
/// (T~^pi f)(s,a) = r(s,a) + gamma E_{s'} sum_a' pi(a'|s') zeta(s',a') f(s',a')
QTable constrained_bellman_evaluation(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter,
                                      const QTable& f);
/// (T~ f)(s,a) = r(s,a) + gamma E_{s'} max_a' zeta(s',a') f(s',a')
QTable constrained_bellman_optimality(const TabularMdp& mdp, const SupportFilter& filter, const QTable& f);

/// Fixed point of T~^pi from the zero table, stopping when the residual is <= tol.
QTable constrained_fixed_point(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol);

/// E_{(s,a) ~ eta^pi}[1(zeta(s,a) = 0)] from the exact occupancy.
double escape_probability(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter);

struct CheckReport {
    std::string check;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;  // the quantity compared against tol
    double tol = 0.0;
    bool passed = false;
};

/// ||f* - Q^{Xi pi}_{M'}||_inf over S x A, where f* is the fixed point of T~^pi on M'.
CheckReport check_fixed_point(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol);

/// v^{Xi pi}_{M'} <= v^pi_{M'} + tol, with equality within tol when pi never leaves the support.
CheckReport check_projection_value(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol);

/// v^pi_M <= v^{Xi pi}_{M'} + V_max * eps / (1 - gamma) + tol with eps the escape probability of pi.
CheckReport check_escape_bound(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double tol);

/// max over the given tables of ||T~^pi f - T~^{Xi pi} f||_inf on M'; passes at 1e-12.
CheckReport check_operator_projection_equiv(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter,
                                            const std::vector<QTable>& tables);

struct MembershipReport {
    double escape_prob = 0.0;
    double epsilon_zeta = 0.0;
    bool member = false;
};

MembershipReport membership(const TabularMdp& mdp, const Policy& pi, const SupportFilter& filter, double epsilon_zeta);

/**
 * Seeded random instance: S uniform in [2, max_states], A actions, Dirichlet(1)
 * transition rows and start distribution, uniform [0, 1] mean rewards (point
 * masses), gamma drawn from {0.5, 0.9, 0.99}, Dirichlet(1) policy rows and a
 * Bernoulli(keep_prob) zeta mask with keep_prob uniform in [0.3, 1].
 */
struct RandomInstance {
    TabularMdp mdp;
    Policy pi;
    SupportFilter filter;
};

/// Dirichlet(1) rows and start distribution, uniform [0, 1] point rewards.
TabularMdp random_mdp(std::uint64_t seed, std::size_t num_states, std::size_t num_actions, double gamma);
/// Dirichlet(1) action distribution per state.
Policy random_policy(std::uint64_t seed, std::size_t num_states, std::size_t num_actions);

RandomInstance random_instance(std::uint64_t seed, std::size_t max_states = 8, std::size_t num_actions = 3);

/// Random tables with entries uniform in [0, scale].
std::vector<QTable> random_tables(std::uint64_t seed, std::size_t count, std::size_t num_states,
                                  std::size_t num_actions, double scale);

}  // namespace mbs
