#pragma once

#include "mbs/mdp.hpp"

#include <cstdint>
#include <vector>

namespace mbs {

/// (T^pi f)(s,a) = r(s,a) + gamma * E_{s'} sum_{a'} pi(a'|s') f(s',a')
QTable bellman_evaluation(const TabularMdp& mdp, const Policy& pi, const QTable& f);

/// (T f)(s,a) = r(s,a) + gamma * E_{s'} max_{a'} f(s',a')
QTable bellman_optimality(const TabularMdp& mdp, const QTable& f);

/// V(s) = sum_a pi(a|s) Q(s,a)
std::vector<double> state_values(const QTable& q, const Policy& pi);

/// Default iteration budget for the fixed-point solvers.
inline constexpr std::size_t kDefaultMaxIterations = 10'000'000;

/**
 * Iterates T^pi from the zero table until ||Q - T^pi Q||_inf <= tol.
 * Throws NumericError on non-finite values or when the budget runs out.
 */
QTable exact_policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol,
                               std::size_t max_iterations = kDefaultMaxIterations);

struct ValueIterationResult {
    QTable q;
    Policy policy;  // greedy, lowest-index ties
    std::size_t iterations = 0;
};

/// Iterates T from zero until ||Q - T Q||_inf <= tol.
ValueIterationResult exact_value_iteration(const TabularMdp& mdp, double tol,
                                           std::size_t max_iterations = kDefaultMaxIterations);

/// v^pi = sum_s rho(s) sum_a pi(a|s) Q^pi(s,a)
double policy_value(const TabularMdp& mdp, const Policy& pi, double tol);

/// Expected value of a Q table under rho and pi (no solving).
double initial_value(const TabularMdp& mdp, const Policy& pi, const QTable& q);

/**
 * eta^pi(s,a) = (1 - gamma) sum_h gamma^h eta_h(s) pi(a|s), computed by forward
 * recursion truncated at the first H with gamma^H * V_max <= tol and then
 * renormalized to unit mass.
 */
OccupancyMeasure occupancy(const TabularMdp& mdp, const Policy& pi, double tol);

/// Per-step marginals eta_h(s,a) = Pr[s_h = s] pi(a|s) for h = 0 .. horizon-1.
std::vector<Table> step_marginals(const TabularMdp& mdp, const Policy& pi, std::size_t horizon);

/**
 * Samples one episode: s_0 ~ rho, a ~ pi, r ~ R, s' ~ P. Stops after max_steps
 * transitions or right after entering a terminal state; a terminal start state
 * yields an empty trajectory. Same seed, same trajectory.
 */
std::vector<Transition> sample_episode(const TabularMdp& mdp, const Policy& pi, std::size_t max_steps,
                                       std::uint64_t rng_seed);

}  // namespace mbs
