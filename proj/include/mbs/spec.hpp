#pragma once

#include "mbs/errors.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mbs {

enum class ExperimentKind { success_rate, cartpole, safe_improve, verify_theory };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& text);

/// Support threshold: either a constant or `numerator / n`.
struct Threshold {
    double value = 10.0;
    bool per_n = true;

    double resolve(std::size_t n) const noexcept { return per_n ? value / static_cast<double>(n) : value; }
    std::string to_string() const;
    static Threshold parse(const std::string& text);
    bool operator==(const Threshold&) const = default;
};

/**
 * Experiment description read from a `key = value` text file. `#` starts a
 * comment; list values are comma separated. Every key has a default except
 * `experiment`. Keys that do not apply to the chosen experiment are rejected.
 *
 * success_rate:  environment, algorithms, n, repeats, b, bcql_tau, dataset_mode,
 *                q_iterations, pi_outer, pi_inner, success_tol, seed, output
 * cartpole:      algorithms, n, repeats, epsilon, b, spibb_b, bcql_tau, q_iterations,
 *                sampling_episodes, eval_episodes, eval_every, calibration_floor,
 *                cartpole_ranges, gamma, success_tol, seed, output
 * safe_improve:  instances, num_states, num_actions, gamma, n, b_fraction,
 *                pi_outer, pi_inner, improve_tol, seed, output
 * verify_theory: instances, max_states, num_actions, operator_cases,
 *                reduction_datasets, seed, output
 */
struct ExperimentSpec {
    ExperimentKind experiment = ExperimentKind::success_rate;
    std::string environment = "combination_lock";
    std::vector<std::string> algorithms;
    std::vector<std::size_t> n;
    std::size_t repeats = 100;
    std::vector<double> epsilon;
    std::vector<Threshold> b;
    std::vector<Threshold> spibb_b;
    std::vector<double> bcql_tau;
    std::string dataset_mode = "trajectory_pool";
    std::size_t q_iterations = 500;
    std::size_t pi_outer = 20;
    std::size_t pi_inner = 100;
    double success_tol = 1e-6;  // success_rate: multiple of V_max; cartpole: return units

    std::size_t sampling_episodes = 10;
    std::size_t eval_episodes = 100;
    std::size_t eval_every = 25;
    double calibration_floor = 150.0;
    std::vector<double> cartpole_ranges;  // half-widths: x, x_dot, theta, theta_dot
    double gamma = 0.99;

    std::size_t instances = 100;
    std::size_t num_states = 10;
    std::size_t max_states = 8;
    std::size_t num_actions = 3;
    double b_fraction = 0.5;
    double improve_tol = 0.05;  // multiple of V_max
    std::size_t operator_cases = 100;
    std::size_t reduction_datasets = 20;

    std::uint64_t seed = 0;
    std::string output;

    bool operator==(const ExperimentSpec&) const = default;
};

/// Defaults for one experiment kind.
ExperimentSpec default_spec(ExperimentKind kind);

ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec parse_spec_text(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

/// Writes every key that applies to the experiment, in a fixed order.
void write_spec(std::ostream& out, const ExperimentSpec& spec, const std::string& line_prefix = "");
std::string serialize(const ExperimentSpec& spec);

/// Checks invariants (non-empty grids, repeats >= 1, known ids); throws SpecError.
void validate(const ExperimentSpec& spec);

/// The default output file name for a spec.
std::string output_name(const ExperimentSpec& spec);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double x);

/// round(10^e) for e = 2, 2.5, ..., 5
std::vector<std::size_t> default_sample_grid();

}  // namespace mbs
