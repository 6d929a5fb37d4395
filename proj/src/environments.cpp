#include "mbs/environments.hpp"

#include <cmath>
#include <string>

namespace mbs {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

bool is_prob(double p) { return p >= 0.0 && p <= 1.0; }

Table behavior_table(const std::vector<std::vector<double>>& rows, std::size_t num_states, std::size_t num_actions) {
    if (rows.empty()) return Table(num_states, num_actions, 1.0 / static_cast<double>(num_actions));
    require(rows.size() == num_states, "behavior_action_probs needs one row per state");
    Table t(num_states, num_actions);
    for (StateId s = 0; s < num_states; ++s) {
        require(rows[s].size() == num_actions, "behavior_action_probs row " + std::to_string(s) + " has wrong length");
        for (ActionId a = 0; a < num_actions; ++a) t(s, a) = rows[s][a];
    }
    return t;
}

}  // namespace

std::pair<TabularMdp, Policy> build_rare_transition_mdp(const RareTransitionConfig& cfg) {
    using namespace rare_transition;
    require(cfg.rare_prob >= 0.0 && cfg.rare_prob < 1.0, "rare_prob must lie in [0, 1)");
    require(cfg.horizon == 2, "the rare-transition instance has horizon 2");
    require(cfg.num_actions >= 2, "the rare-transition instance needs at least 2 actions");
    require(is_prob(cfg.rare_reward_prob), "rare_reward_prob must lie in [0, 1]");
    require(cfg.reward_high >= 0.0 && cfg.reward_common >= 0.0 && cfg.rare_reward_value >= 0.0,
            "rewards must be non-negative");

    const std::size_t A = cfg.num_actions;
    MdpBuilder b(kNumStates, A, cfg.gamma);
    b.name("rare_transition").initial_state(kStart).terminal(kEnd).absorbing(kEnd);

    b.deterministic_transition(kStart, 0, kSafe).point_reward(kStart, 0, 0.0);
    for (ActionId a = 1; a < A; ++a) {
        b.transition(kStart, a, {{kCommon, 1.0 - cfg.rare_prob}, {kRare, cfg.rare_prob}});
        b.point_reward(kStart, a, 0.0);
    }
    for (ActionId a = 0; a < A; ++a) {
        for (StateId s : {kSafe, kCommon, kRare}) b.deterministic_transition(s, a, kEnd);
        b.point_reward(kSafe, a, a == 0 ? cfg.reward_high : 0.0);
        b.point_reward(kCommon, a, a == 0 ? cfg.reward_common : 0.0);
        b.bernoulli_reward(kRare, a, cfg.rare_reward_prob, cfg.rare_reward_value);
    }

    Policy behavior = Policy::stochastic(behavior_table(cfg.behavior_action_probs, kNumStates, A));
    return {b.build(), std::move(behavior)};
}

std::vector<ActionId> combination_lock::correct_actions(const CombinationLockConfig& cfg) {
    if (!cfg.correct_actions.empty()) {
        require(cfg.correct_actions.size() == cfg.horizon, "correct_actions needs one entry per stage");
        for (ActionId a : cfg.correct_actions) require(a < cfg.num_arms, "correct action out of range");
        return cfg.correct_actions;
    }
    std::vector<ActionId> out(cfg.horizon);
    for (std::size_t h = 0; h < cfg.horizon; ++h) out[h] = kDefaultPattern[h % kDefaultPattern.size()] % cfg.num_arms;
    return out;
}

std::pair<TabularMdp, Policy> build_combination_lock_mdp(const CombinationLockConfig& cfg) {
    using namespace combination_lock;
    require(cfg.horizon >= 1, "horizon must be at least 1");
    require(cfg.num_arms >= 2, "num_arms must be at least 2");
    require(is_prob(cfg.slip_prob), "slip_prob must lie in [0, 1]");
    require(is_prob(cfg.trap_reward_prob), "trap_reward_prob must lie in [0, 1]");
    require(cfg.reward_good >= 0.0 && cfg.trap_reward >= 0.0, "rewards must be non-negative");
    require(cfg.behavior_action_probs.size() == cfg.num_arms, "behavior_action_probs needs num_arms entries");
    double total = 0.0;
    for (double p : cfg.behavior_action_probs) {
        require(p >= 0.0, "behavior probabilities must be non-negative");
        total += p;
    }
    require(std::abs(total - 1.0) <= 1e-12, "behavior probabilities must sum to 1");

    const std::size_t H = cfg.horizon;
    const std::size_t A = cfg.num_arms;
    const std::size_t S = 2 * H;
    const std::vector<ActionId> correct = correct_actions(cfg);
    const StateId end = end_state(H);

    MdpBuilder b(S, A, cfg.gamma);
    b.name("combination_lock").initial_state(chain_state(0)).terminal(end).absorbing(end);

    Table mu(S, A, 1.0 / static_cast<double>(A));
    for (std::size_t h = 0; h < H; ++h) {
        const StateId s = chain_state(h);
        const bool last = h + 1 == H;
        std::size_t rank = 1;
        for (ActionId a = 0; a < A; ++a) {
            if (a == correct[h]) {
                mu(s, a) = cfg.behavior_action_probs[0];
                if (last) {
                    b.deterministic_transition(s, a, end).point_reward(s, a, cfg.reward_good);
                } else {
                    b.transition(s, a, {{chain_state(h + 1), 1.0 - cfg.slip_prob}, {trap_state(H, h + 1), cfg.slip_prob}});
                    b.point_reward(s, a, 0.0);
                }
            } else {
                mu(s, a) = cfg.behavior_action_probs[rank++];
                b.deterministic_transition(s, a, last ? end : trap_state(H, h + 1)).point_reward(s, a, 0.0);
            }
        }
    }
    for (std::size_t h = 1; h < H; ++h) {
        const StateId t = trap_state(H, h);
        for (ActionId a = 0; a < A; ++a) {
            b.deterministic_transition(t, a, end).bernoulli_reward(t, a, cfg.trap_reward_prob, cfg.trap_reward);
        }
    }
    return {b.build(), Policy::stochastic(std::move(mu))};
}

std::vector<std::size_t> rare_transition_stages() { return {0, 1, 1, 1, 2}; }

std::vector<std::size_t> combination_lock_stages(std::size_t horizon) {
    std::vector<std::size_t> out(2 * horizon);
    for (std::size_t h = 0; h < horizon; ++h) out[combination_lock::chain_state(h)] = h;
    for (std::size_t h = 1; h < horizon; ++h) out[combination_lock::trap_state(horizon, h)] = h;
    out[combination_lock::end_state(horizon)] = horizon;
    return out;
}

}  // namespace mbs
