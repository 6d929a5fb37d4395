#pragma once

#include "mbs/mdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mbs {

/**
 * How a batch is drawn from (mdp, behavior).
 *  - iid_occupancy: (s,a) i.i.d. from the exact discounted occupancy of the
 *    behavior policy, then r ~ R(s,a) and s' ~ P(s,a).
 *  - trajectory_pool: whole episodes from rho are pooled until n transitions
 *    are collected; the last episode is cut.
 */
enum class DatasetMode { iid_occupancy, trajectory_pool };

std::string_view to_string(DatasetMode mode) noexcept;
DatasetMode parse_dataset_mode(std::string_view text);

struct Provenance {
    std::string mdp_id;
    std::string behavior_id;
    std::uint64_t seed = 0;
    std::string mode;  // a DatasetMode name, or a collector-specific tag
    bool operator==(const Provenance&) const = default;
};

struct Dataset {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<Transition> transitions;
    Provenance provenance;

    std::size_t n() const noexcept { return transitions.size(); }
    bool operator==(const Dataset&) const = default;
};

Dataset generate_dataset(const TabularMdp& mdp, const Policy& behavior, std::size_t n, DatasetMode mode,
                         std::uint64_t rng_seed, std::string behavior_id = "behavior",
                         std::size_t max_episode_steps = 1000);

/// Maximum-likelihood estimates of mu(s,a) and mu(a|s) from counts.
struct DensityEstimate {
    std::size_t n = 0;
    Table joint;        // counts / n
    Table conditional;  // per-state normalized counts; uniform rows for unseen states
    std::vector<std::size_t> counts;        // S x A, row-major
    std::vector<std::size_t> state_counts;  // S

    std::size_t num_states() const noexcept { return joint.num_states(); }
    std::size_t num_actions() const noexcept { return joint.num_actions(); }
    std::size_t count(StateId s, ActionId a) const noexcept { return counts[s * joint.num_actions() + a]; }
};

DensityEstimate estimate_density(const Dataset& dataset, std::size_t num_states, std::size_t num_actions);
DensityEstimate estimate_density(const Dataset& dataset);

/**
 * zeta(s,a) = 1(mu_hat(s,a) >= b), inclusive. With b = 0 every pair passes,
 * including pairs never seen; use b = 1/(2n) for "seen only".
 */
class SupportFilter {
public:
    SupportFilter() = default;
    SupportFilter(std::size_t num_states, std::size_t num_actions, double b, std::vector<std::uint8_t> indicator);

    static SupportFilter all_ones(std::size_t num_states, std::size_t num_actions);
    static SupportFilter all_zeros(std::size_t num_states, std::size_t num_actions);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    double threshold() const noexcept { return b_; }

    bool operator()(StateId s, ActionId a) const noexcept { return indicator_[s * num_actions_ + a] != 0; }
    /// zeta as 0.0 / 1.0
    double weight(StateId s, ActionId a) const noexcept { return (*this)(s, a) ? 1.0 : 0.0; }
    bool any_supported(StateId s) const noexcept;
    std::size_t support_size() const noexcept;
    const std::vector<std::uint8_t>& indicator() const noexcept { return indicator_; }

    bool operator==(const SupportFilter&) const = default;

private:
    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    double b_ = 0.0;
    std::vector<std::uint8_t> indicator_;
};

SupportFilter build_filter(const DensityEstimate& density, double b);

struct FilterDiagnostics {
    double policy_support_rate = 0.0;  // mean over transitions of zeta(s_i, pi(s_i))
    std::size_t support_size = 0;      // number of (s,a) with zeta = 1
    double data_in_support = 0.0;      // fraction of transitions with zeta(s_i, a_i) = 1
};

/// pi must be deterministic.
FilterDiagnostics filter_diagnostics(const SupportFilter& filter, const Dataset& dataset, const Policy& pi);

/**
 * Dataset text format:
 *   # mbsrl-dataset 1
 *   # mdp_id=<tok> behavior_id=<tok> seed=<u64> mode=<tok> states=<S> actions=<A> n=<n>
 *   s a r s_next        (one line per transition)
 */
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset read_dataset(std::istream& in);

/// CSV with columns s,a,count,joint,conditional
void write_density_csv(std::ostream& out, const DensityEstimate& density);
/// CSV with columns s,a,zeta
void write_filter_csv(std::ostream& out, const SupportFilter& filter);

}  // namespace mbs
