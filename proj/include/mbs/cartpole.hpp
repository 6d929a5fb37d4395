#pragma once

#include "mbs/dataset.hpp"
#include "mbs/mdp.hpp"

#include <array>
#include <cstdint>
#include <utility>

namespace mbs {

/// Classic cart-pole constants, Euler integration.
struct CartPolePhysics {
    double gravity = 9.8;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double half_length = 0.5;
    double force = 10.0;
    double dt = 0.02;
    double x_threshold = 2.4;
    double theta_threshold = 12.0 * 3.14159265358979323846 / 180.0;
};

/// (x, x_dot, theta, theta_dot)
using CartPoleState = std::array<double, 4>;

struct CartPoleStep {
    CartPoleState state;
    bool done;
};

/// Action 1 pushes right (+force), action 0 pushes left.
CartPoleStep cartpole_continuous_step(const CartPoleState& state, ActionId action, const CartPolePhysics& physics = {});

/// Same step with an arbitrary applied force; a test hook for the F = 0 case.
CartPoleStep cartpole_step_with_force(const CartPoleState& state, double force, const CartPolePhysics& physics = {});

struct CartPoleDiscretization {
    std::size_t bins_per_dim = 10;
    std::array<std::pair<double, double>, 4> dim_ranges = {{{-2.4, 2.4}, {-2.0, 2.0}, {-0.21, 0.21}, {-2.5, 2.5}}};
    CartPolePhysics physics;
    std::size_t max_steps = 200;
    double gamma = 0.99;
    /// Episodes start uniformly in [-start_box, start_box]^4.
    double start_box = 0.05;
};

void validate(const CartPoleDiscretization& cfg);

std::size_t cartpole_num_bins(const CartPoleDiscretization& cfg);
/// Index of the terminal state in the tabular model (= number of bins).
inline StateId cartpole_terminal_state(const CartPoleDiscretization& cfg) { return cartpole_num_bins(cfg); }

/**
 * Bin index of a continuous state: per-dimension index i_d = floor((v - lo) / width),
 * clamped to [0, bins-1], combined as sum_d i_d * bins^d. Values outside a range
 * land in the edge bin of that dimension.
 */
StateId cartpole_bin(const CartPoleDiscretization& cfg, const CartPoleState& state);

std::array<std::size_t, 4> cartpole_bin_coords(const CartPoleDiscretization& cfg, StateId bin);
/// Lower and upper corners of a bin inside the configured ranges.
std::pair<CartPoleState, CartPoleState> cartpole_bin_box(const CartPoleDiscretization& cfg, StateId bin);

/// Exact probability of each bin under the uniform start box (length = number of bins).
std::vector<double> cartpole_initial_bin_dist(const CartPoleDiscretization& cfg);

/**
 * Tabular model over bins plus one absorbing terminal state, 2 actions.
 * For every (bin, action), `sampling_episodes` start points are drawn uniformly
 * inside the bin and stepped once; next-bin frequencies give P. A step that
 * ends the episode goes to the terminal state. Every non-terminal state pays 1.
 * Bins that are neither reached by the sweep nor have start mass are marked
 * terminal (absorbing, reward 0).
 */
TabularMdp build_cartpole_mdp(const CartPoleDiscretization& cfg, std::size_t sampling_episodes, std::uint64_t rng_seed);

/// Undiscounted return of one continuous episode capped at max_steps.
double cartpole_rollout(const CartPoleDiscretization& cfg, const Policy& pi, std::uint64_t rng_seed);

/// Mean return over `episodes` continuous rollouts seeded derive_seed(rng_seed, {i}).
double cartpole_evaluate(const CartPoleDiscretization& cfg, const Policy& pi, std::size_t episodes,
                         std::uint64_t rng_seed);

/**
 * Runs the behavior policy in the continuous simulator and records (bin, a, 1, next)
 * transitions until n are collected; a step that ends the episode records the
 * terminal state as next. Episodes are cut at max_steps.
 */
Dataset collect_cartpole_dataset(const CartPoleDiscretization& cfg, const Policy& behavior, std::size_t n,
                                 std::uint64_t rng_seed, std::string behavior_id = "behavior");

}  // namespace mbs
