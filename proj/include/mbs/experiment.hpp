#pragma once

#include "mbs/spec.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace mbs {

/**
 * One algorithm run. `success_rule` is "optimal" (success iff
 * |policy_value - optimal_value| <= success_tol) or "safe" (success iff
 * policy_value >= baseline_value - success_tol). baseline_value is the
 * behavior policy's value.
 */
struct ResultRow {
    std::string experiment;
    std::string environment;
    std::string algorithm;
    std::string hyperparameters;
    std::size_t n = 0;
    double epsilon = 0.0;
    std::size_t repeat = 0;
    std::uint64_t dataset_seed = 0;
    std::uint64_t run_seed = 0;
    double policy_value = 0.0;
    double optimal_value = 0.0;
    double baseline_value = 0.0;
    double success_tol = 0.0;
    std::string success_rule = "optimal";
    bool success = false;
    double support_rate = 0.0;  // mean over dataset states of sum_a pi(a|s) zeta(s,a)
    double runtime_ms = 0.0;    // written to the timing sidecar only
};

bool recompute_success(const ResultRow& row);

struct SummaryRow {
    std::string environment;
    std::string algorithm;
    std::string hyperparameters;
    std::size_t n = 0;
    double epsilon = 0.0;
    std::size_t runs = 0;
    double success_rate = 0.0;
    double success_std = 0.0;
    double value_mean = 0.0;
    double value_std = 0.0;
};

/// Groups rows by (environment, algorithm, hyperparameters, n, epsilon) in first-seen order.
/// Standard deviations are population deviations over the runs of a group.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

struct CurveRow {
    double epsilon = 0.0;
    std::string algorithm;
    std::string hyperparameters;
    std::size_t n = 0;
    std::size_t repeat = 0;
    std::size_t iteration = 0;
    double value = 0.0;
};

struct AblationRow {
    double epsilon = 0.0;
    std::string threshold;
    double b = 0.0;
    std::size_t runs = 0;
    double value_mean = 0.0;
    double value_std = 0.0;
    bool best = false;
};

struct TheoryRow {
    std::string check;
    std::size_t instance = 0;
    std::uint64_t seed = 0;
    std::size_t states = 0;
    std::size_t actions = 0;
    double gamma = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double tol = 0.0;
    bool passed = false;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<ResultRow> rows;
    std::vector<SummaryRow> summary;
    std::vector<CurveRow> curves;
    std::vector<AblationRow> ablation;
    /// Spearman correlation between epsilon and the best b (NaN with fewer than 2 epsilons).
    double ablation_rank_correlation = 0.0;
    std::vector<TheoryRow> theory;
    /// Extra `key = value` facts written into the CSV headers (calibration numbers etc.).
    std::vector<std::pair<std::string, std::string>> facts;
};

/// Runs `count` independent tasks on up to `jobs` threads; the first exception (by task index) is rethrown.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& task);

ExperimentResult run_success_rate(const ExperimentSpec& spec, std::size_t jobs = 1);
ExperimentResult run_cartpole(const ExperimentSpec& spec, std::size_t jobs = 1);
ExperimentResult run_safe_improve(const ExperimentSpec& spec, std::size_t jobs = 1);
ExperimentResult run_verify_theory(const ExperimentSpec& spec, std::size_t jobs = 1);
ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t jobs = 1);

/// Seeds shared by every algorithm on the same dataset.
std::uint64_t dataset_seed(std::uint64_t base, const std::string& environment, std::size_t n, double epsilon,
                           std::size_t repeat);
std::uint64_t run_seed(std::uint64_t base, const std::string& algorithm, const std::string& hyperparameters,
                       std::size_t n, double epsilon, std::size_t repeat);

inline constexpr const char* kResultsSchema = "# mbsrl-results v1";

void write_rows_csv(std::ostream& out, const ExperimentResult& result);
void write_summary_csv(std::ostream& out, const ExperimentResult& result);
void write_timing_csv(std::ostream& out, const ExperimentResult& result);
void write_curves_csv(std::ostream& out, const ExperimentResult& result);
void write_ablation_csv(std::ostream& out, const ExperimentResult& result);
void write_theory_csv(std::ostream& out, const ExperimentResult& result);

/// Writes every applicable CSV under `dir`; returns the paths written.
std::vector<std::filesystem::path> write_results(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace mbs
