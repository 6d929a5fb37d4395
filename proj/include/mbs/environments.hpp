#pragma once

#include "mbs/mdp.hpp"

#include <utility>
#include <vector>

namespace mbs {

/**
 * Two-step MDP with a rare transition.
 *
 * States: 0 = start, 1 = safe, 2 = common, 3 = rare, 4 = end (terminal).
 * From the start, action 0 goes to the safe state and action 1 goes to the
 * common state, or with probability rare_prob to the rare state. Stage-1
 * states pay on their action and move to the end state.
 *
 *   safe:   action 0 pays reward_high, other actions pay 0
 *   common: action 0 pays reward_common, other actions pay 0
 *   rare:   every action pays rare_reward_value with probability rare_reward_prob
 *
 * The canonical numbers make the safe branch optimal by a margin that a few
 * lucky rewards in the rare state overturn.
 */
struct RareTransitionConfig {
    double rare_prob = 0.01;
    std::size_t horizon = 2;
    std::size_t num_actions = 2;
    double reward_high = 0.5;
    double reward_common = 0.499;
    double rare_reward_value = 1.0;
    double rare_reward_prob = 0.3;
    double gamma = 0.999;
    /// mu(a|s), one row per state (5 rows); empty means uniform everywhere.
    std::vector<std::vector<double>> behavior_action_probs;
};

namespace rare_transition {
inline constexpr StateId kStart = 0;
inline constexpr StateId kSafe = 1;
inline constexpr StateId kCommon = 2;
inline constexpr StateId kRare = 3;
inline constexpr StateId kEnd = 4;
inline constexpr std::size_t kNumStates = 5;
}  // namespace rare_transition

std::pair<TabularMdp, Policy> build_rare_transition_mdp(const RareTransitionConfig& cfg);

/**
 * Combination lock of length `horizon` with `num_arms` actions.
 *
 * Chain states c_0 .. c_{H-1}, trap states t_1 .. t_{H-1}, one terminal end
 * state. At c_h the correct arm (correct_actions[h]) advances to c_{h+1}
 * (with probability 1 - slip_prob, otherwise to the trap t_{h+1}); any other
 * arm falls into t_{h+1}. The correct arm at c_{H-1} pays reward_good and
 * ends the episode; a wrong arm there ends it with no reward. Every action
 * in a trap pays trap_reward with probability trap_reward_prob and ends the
 * episode.
 *
 * behavior_action_probs[0] is the behavior probability of the correct arm at
 * every chain state; entries 1.. are spread over the wrong arms in index
 * order. Traps and the end state use the uniform behavior.
 */
struct CombinationLockConfig {
    std::size_t horizon = 10;
    std::size_t num_arms = 2;
    double slip_prob = 0.0;
    double reward_good = 1.0;
    double trap_reward = 1.0;
    double trap_reward_prob = 0.5;
    double gamma = 0.999;
    std::vector<double> behavior_action_probs = {0.8, 0.2};
    /// Correct arm per chain stage; empty means the fixed default pattern.
    std::vector<ActionId> correct_actions;
};

namespace combination_lock {
/// Default correct-arm pattern, cycled if the horizon exceeds its length.
inline const std::vector<ActionId> kDefaultPattern = {1, 0, 0, 1, 0, 1, 1, 0, 1, 0};
inline StateId chain_state(std::size_t h) { return h; }
/// Trap reached after a wrong arm at stage h - 1; h in [1, horizon).
inline StateId trap_state(std::size_t horizon, std::size_t h) { return horizon + h - 1; }
inline StateId end_state(std::size_t horizon) { return 2 * horizon - 1; }
std::vector<ActionId> correct_actions(const CombinationLockConfig& cfg);
}  // namespace combination_lock

std::pair<TabularMdp, Policy> build_combination_lock_mdp(const CombinationLockConfig& cfg);

/// Stage index of each state for the time-indexed instances (end state = horizon).
std::vector<std::size_t> rare_transition_stages();
std::vector<std::size_t> combination_lock_stages(std::size_t horizon);

}  // namespace mbs
