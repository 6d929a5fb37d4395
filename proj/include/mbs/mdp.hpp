#pragma once

#include "mbs/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mbs {

using StateId = std::size_t;
using ActionId = std::size_t;

/// One entry of a sparse next-state distribution.
struct Outcome {
    StateId state;
    double prob;
    bool operator==(const Outcome&) const = default;
};

/// One atom of a discrete reward distribution.
struct RewardAtom {
    double value;
    double prob;
    bool operator==(const RewardAtom&) const = default;
};

/// A single (s, a, r, s') sample.
struct Transition {
    StateId s;
    ActionId a;
    double r;
    StateId s_next;
    bool operator==(const Transition&) const = default;
};

/**
 * Dense real table over S x A, row-major by state.
 * Used for Q functions, occupancy measures and policy probabilities.
 */
class Table {
public:
    Table() = default;
    Table(std::size_t num_states, std::size_t num_actions, double fill = 0.0)
        : num_states_(num_states), num_actions_(num_actions), values_(num_states * num_actions, fill) {}

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(StateId s, ActionId a) noexcept { return values_[s * num_actions_ + a]; }
    double operator()(StateId s, ActionId a) const noexcept { return values_[s * num_actions_ + a]; }

    std::span<double> row(StateId s) noexcept { return {values_.data() + s * num_actions_, num_actions_}; }
    std::span<const double> row(StateId s) const noexcept {
        return {values_.data() + s * num_actions_, num_actions_};
    }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    bool same_shape(const Table& other) const noexcept {
        return num_states_ == other.num_states_ && num_actions_ == other.num_actions_;
    }

    bool operator==(const Table&) const = default;

private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<double> values_;
};

using QTable = Table;

/// Sup-norm of the entrywise difference; tables must share a shape.
double max_abs_diff(const Table& a, const Table& b);

/**
 * A stationary policy. Deterministic policies keep their action vector;
 * every policy exposes a dense probability table.
 */
class Policy {
public:
    Policy() = default;

    static Policy deterministic(std::vector<ActionId> actions, std::size_t num_actions);
    /// Rows must be probability vectors (sum 1 within 1e-12, non-negative).
    static Policy stochastic(Table probabilities);
    static Policy uniform(std::size_t num_states, std::size_t num_actions);

    std::size_t num_states() const noexcept { return probs_.num_states(); }
    std::size_t num_actions() const noexcept { return probs_.num_actions(); }

    double prob(StateId s, ActionId a) const noexcept { return probs_(s, a); }
    std::span<const double> row(StateId s) const noexcept { return probs_.row(s); }
    const Table& probabilities() const noexcept { return probs_; }

    bool is_deterministic() const noexcept { return deterministic_; }
    /// The chosen action; throws ConfigError for stochastic policies.
    ActionId action(StateId s) const;
    const std::vector<ActionId>& actions() const noexcept { return actions_; }

    bool operator==(const Policy& other) const { return probs_ == other.probs_; }

private:
    Table probs_;
    std::vector<ActionId> actions_;
    bool deterministic_ = false;
};

/// Index of the largest entry; ties go to the lowest index.
ActionId argmax_lowest(std::span<const double> values) noexcept;

/// Greedy deterministic policy of a Q table with lowest-index tie-breaking.
Policy greedy_policy(const QTable& q);

/// 1 - epsilon on the greedy action of q, epsilon spread uniformly over all actions.
Policy epsilon_greedy(const QTable& q, double epsilon);

/**
 * Finite MDP (S, A, P, R, gamma, rho) with per-(s,a) discrete reward
 * distributions. Transitions are stored as sparse rows sorted by next state.
 * States flagged terminal end sampled episodes; the model still has to give
 * them a proper (normally absorbing, zero-reward) row.
 *
 * Instances are immutable and validated on construction.
 */
class TabularMdp {
public:
    TabularMdp() = default;

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double gamma() const noexcept { return gamma_; }
    double r_max() const noexcept { return r_max_; }
    /// r_max / (1 - gamma), an upper bound on every Q value.
    double v_max() const noexcept { return r_max_ / (1.0 - gamma_); }

    std::span<const Outcome> successors(StateId s, ActionId a) const noexcept {
        const std::size_t i = s * num_actions_ + a;
        return {outcomes_.data() + outcome_offsets_[i], outcome_offsets_[i + 1] - outcome_offsets_[i]};
    }
    std::span<const RewardAtom> reward_dist(StateId s, ActionId a) const noexcept {
        const std::size_t i = s * num_actions_ + a;
        return {atoms_.data() + atom_offsets_[i], atom_offsets_[i + 1] - atom_offsets_[i]};
    }
    double reward_mean(StateId s, ActionId a) const noexcept { return reward_mean_[s * num_actions_ + a]; }
    /// Probability of moving to `next` (linear scan of the sparse row).
    double transition_prob(StateId s, ActionId a, StateId next) const noexcept;

    const std::vector<double>& initial_dist() const noexcept { return initial_; }
    bool is_terminal(StateId s) const noexcept { return terminal_[s] != 0; }
    const std::vector<std::uint8_t>& terminal_flags() const noexcept { return terminal_; }

    const std::string& name() const noexcept { return name_; }

    bool operator==(const TabularMdp&) const = default;

private:
    friend class MdpBuilder;

    std::string name_;
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    double gamma_ = 0.0;
    double r_max_ = 0.0;
    std::vector<double> initial_;
    std::vector<std::uint8_t> terminal_;
    std::vector<std::size_t> outcome_offsets_;
    std::vector<Outcome> outcomes_;
    std::vector<std::size_t> atom_offsets_;
    std::vector<RewardAtom> atoms_;
    std::vector<double> reward_mean_;
};

/**
 * Incremental construction of a TabularMdp. Unset transition rows default to a
 * self-loop and unset rewards to a point mass at 0. build() validates every
 * invariant and throws ConfigError on violation.
 */
class MdpBuilder {
public:
    MdpBuilder(std::size_t num_states, std::size_t num_actions, double gamma);

    MdpBuilder& name(std::string name);
    MdpBuilder& r_max(double r_max);
    MdpBuilder& initial(std::vector<double> dist);
    MdpBuilder& initial_state(StateId s);
    MdpBuilder& terminal(StateId s, bool flag = true);
    /// Duplicate next states are merged; zero-probability entries are dropped.
    MdpBuilder& transition(StateId s, ActionId a, std::vector<Outcome> outcomes);
    MdpBuilder& deterministic_transition(StateId s, ActionId a, StateId next);
    MdpBuilder& reward(StateId s, ActionId a, std::vector<RewardAtom> atoms);
    MdpBuilder& point_reward(StateId s, ActionId a, double value);
    /// Reward `value` with probability p, else 0.
    MdpBuilder& bernoulli_reward(StateId s, ActionId a, double p, double value);
    /// Makes s absorbing with zero reward under every action.
    MdpBuilder& absorbing(StateId s);

    TabularMdp build() const;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    double gamma_;
    double r_max_ = -1.0;  // < 0: infer from rewards
    std::string name_;
    std::vector<double> initial_;
    std::vector<std::uint8_t> terminal_;
    std::vector<std::vector<Outcome>> transitions_;
    std::vector<std::vector<RewardAtom>> rewards_;
};

/// Discounted-normalized state-action occupancy.
struct OccupancyMeasure {
    Table eta;
    std::size_t horizon_truncation = 0;
};

}  // namespace mbs
