#pragma once

#include "mbs/dataset.hpp"
#include "mbs/mdp.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace mbs {

/**
 * Per-pair statistics of a dataset: counts, mean reward and the empirical
 * next-state distribution p_hat(s'|s,a) = c(s,a,s') / c(s,a), successors in
 * index order. Built once and shared by every backup of a run.
 */
class EmpiricalModel {
public:
    EmpiricalModel() = default;
    explicit EmpiricalModel(const Dataset& dataset);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    std::size_t count(StateId s, ActionId a) const noexcept { return counts_[s * num_actions_ + a]; }
    double mean_reward(StateId s, ActionId a) const noexcept { return mean_reward_[s * num_actions_ + a]; }
    std::span<const Outcome> successors(StateId s, ActionId a) const noexcept {
        const std::size_t i = s * num_actions_ + a;
        return {outcomes_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    /// True when s appears as a source state in the dataset.
    bool visited(StateId s) const noexcept { return visited_[s] != 0; }

private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    std::vector<std::size_t> counts_;
    std::vector<double> mean_reward_;
    std::vector<std::size_t> offsets_;
    std::vector<Outcome> outcomes_;
    std::vector<std::uint8_t> visited_;
};

/// Value used for pairs with no data.
inline constexpr double kUnsampledValue = 0.0;

/// Sample-mean backups over the complete tabular class; zero-count pairs get kUnsampledValue.
/// target: r + gamma * sum_a' pi(a'|s') zeta(s',a') f(s',a')
QTable constrained_eval_backup(const QTable& f, const Policy& pi, const EmpiricalModel& model,
                               const SupportFilter& filter, double gamma);
QTable constrained_eval_backup(const QTable& f, const Policy& pi, const Dataset& dataset,
                               const SupportFilter& filter, double gamma);
/// target: r + gamma * max_a' zeta(s',a') f(s',a')
QTable constrained_opt_backup(const QTable& f, const EmpiricalModel& model, const SupportFilter& filter, double gamma);
QTable constrained_opt_backup(const QTable& f, const Dataset& dataset, const SupportFilter& filter, double gamma);

/// target: r + gamma * sum_a' pi(a'|s') f(s',a')
QTable empirical_eval_backup(const QTable& f, const Policy& pi, const EmpiricalModel& model, double gamma);
/// target: r + gamma * max_a' f(s',a')
QTable empirical_opt_backup(const QTable& f, const EmpiricalModel& model, double gamma);

inline constexpr std::size_t kDefaultQIterations = 500;
inline constexpr std::size_t kDefaultPiOuterIterations = 20;
inline constexpr std::size_t kDefaultPiInnerIterations = 100;

struct AlgorithmConfig {
    double gamma = 0.99;
    std::size_t outer_iters = kDefaultQIterations;  // T
    std::size_t inner_iters = kDefaultPiInnerIterations;  // K, policy iteration only
    std::uint64_t seed = 0;  // recorded; every algorithm here is deterministic

    bool record_q = false;
    bool record_policies = false;
    /// When set, called on the iterate policy every eval_every iterations and at the end.
    std::function<double(const Policy&)> evaluator;
    std::size_t eval_every = 1;

    static AlgorithmConfig q_iteration(double gamma, std::size_t iterations = kDefaultQIterations);
    static AlgorithmConfig policy_iteration(double gamma, std::size_t outer = kDefaultPiOuterIterations,
                                            std::size_t inner = kDefaultPiInnerIterations);
    void validate() const;
};

struct RunTrace {
    std::vector<QTable> q;            // f_1 .. f_T (Q iteration) or the last inner iterate per outer step
    std::vector<Policy> policies;     // iterate policy after each outer step
    std::vector<std::size_t> value_iterations;
    std::vector<double> values;       // evaluator output at value_iterations
};

/// CSV with columns iteration,value
void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct RunResult {
    Policy policy;
    QTable q;  // final table
    RunTrace trace;
};

/// argmax over actions with zeta = 1, lowest index on ties; 0 when none is supported.
ActionId supported_argmax(std::span<const double> row, const SupportFilter& filter, StateId s);

RunResult mbs_qi(const Dataset& dataset, const SupportFilter& filter, const AlgorithmConfig& cfg);
RunResult mbs_pi(const Dataset& dataset, const SupportFilter& filter, const AlgorithmConfig& cfg);
RunResult fqi(const Dataset& dataset, const AlgorithmConfig& cfg);
RunResult api(const Dataset& dataset, const AlgorithmConfig& cfg);

/// Bootstraps only from actions with mu_hat(a'|s') > tau (strict).
RunResult bcql(const Dataset& dataset, const DensityEstimate& density, double tau, const AlgorithmConfig& cfg);

/**
 * Q iteration whose backup policy at s' keeps mu_hat(a'|s') on every action
 * with zeta = 0 and puts the remaining mass on the best action with zeta = 1.
 * With no supported action the backup policy is mu_hat(.|s').
 */
RunResult spibb(const Dataset& dataset, const DensityEstimate& density, const SupportFilter& filter,
                const AlgorithmConfig& cfg);
/// The SPIBB backup policy for a given table.
Policy spibb_policy(const QTable& f, const DensityEstimate& density, const SupportFilter& filter);

/// mu_hat(a|s) with uniform rows on unseen states.
Policy behavior_cloning(const Dataset& dataset);

}  // namespace mbs
