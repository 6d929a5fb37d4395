#include "mbs/algorithms.hpp"
#include "mbs/environments.hpp"
#include "mbs/errors.hpp"
#include "mbs/solve.hpp"
#include "mbs/theory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace mbs;

namespace {

// One-step bandit: state 0 with 3 arms, every pull ends in the absorbing state 1.
Dataset bandit_data() {
    Dataset d;
    d.num_states = 2;
    d.num_actions = 3;
    // arm 0: 4 pulls, mean 0.25; arm 1: 1 pull, reward 1; arm 2: 5 pulls, mean 0.6
    for (double r : {0.0, 1.0, 0.0, 0.0}) d.transitions.push_back({0, 0, r, 1});
    d.transitions.push_back({0, 1, 1.0, 1});
    for (double r : {1.0, 1.0, 0.0, 1.0, 0.0}) d.transitions.push_back({0, 2, r, 1});
    return d;
}

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t S = 6, std::size_t A = 3, double gamma = 0.9) {
    const TabularMdp m = random_mdp(seed, S, A, gamma);
    return generate_dataset(m, random_policy(seed + 1, S, A), n, DatasetMode::iid_occupancy, seed + 2);
}

}  // namespace

TEST(Bandit, FqiRecoversSampleMeans) {
    const Dataset d = bandit_data();
    const auto r = fqi(d, AlgorithmConfig::q_iteration(0.9, 5));
    EXPECT_DOUBLE_EQ(r.q(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(r.q(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(r.q(0, 2), 0.6);
    EXPECT_EQ(r.policy.action(0), 1u);
}

TEST(Bandit, SupportThresholdExcludesRareArm) {
    const Dataset d = bandit_data();
    // mu_hat = 0.4, 0.1, 0.5; b = 0.2 drops arm 1.
    const SupportFilter f = build_filter(estimate_density(d), 0.2);
    const auto r = mbs_qi(d, f, AlgorithmConfig::q_iteration(0.9, 5));
    EXPECT_EQ(r.policy.action(0), 2u);
    const auto p = mbs_pi(d, f, AlgorithmConfig::policy_iteration(0.9, 3, 5));
    EXPECT_EQ(p.policy.action(0), 2u);
}

TEST(Bandit, BcqlThresholdIsStrict) {
    const Dataset d = bandit_data();
    const DensityEstimate est = estimate_density(d);
    EXPECT_EQ(bcql(d, est, 0.1, AlgorithmConfig::q_iteration(0.9, 5)).policy.action(0), 2u);
    EXPECT_EQ(bcql(d, est, 0.0, AlgorithmConfig::q_iteration(0.9, 5)).policy.action(0), 1u);
}

TEST(Bandit, BehaviorCloningIsConditional) {
    const Policy pi = behavior_cloning(bandit_data());
    EXPECT_DOUBLE_EQ(pi.prob(0, 0), 0.4);
    EXPECT_DOUBLE_EQ(pi.prob(0, 1), 0.1);
    EXPECT_DOUBLE_EQ(pi.prob(1, 2), 1.0 / 3.0);
}

TEST(SupportedArgmax, SkipsUnsupportedAndFallsBackToZero) {
    const SupportFilter f(2, 3, 0.0, {0, 1, 1, 0, 0, 0});
    const std::vector<double> row = {9.0, 2.0, 2.0};
    EXPECT_EQ(supported_argmax(row, f, 0), 1u);
    EXPECT_EQ(supported_argmax(row, f, 1), 0u);
}

TEST(Spibb, BackupPolicyKeepsBehaviorOnUnsupported) {
    Dataset d;
    d.num_states = 2;
    d.num_actions = 3;
    for (int i = 0; i < 6; ++i) d.transitions.push_back({0, 0, 0.0, 1});
    for (int i = 0; i < 3; ++i) d.transitions.push_back({0, 1, 0.0, 1});
    d.transitions.push_back({0, 2, 0.0, 1});
    const DensityEstimate est = estimate_density(d);
    const SupportFilter f = build_filter(est, 0.2);  // arms 0 and 1 supported
    QTable q(2, 3);
    q(0, 0) = 1.0;
    q(0, 1) = 2.0;
    q(0, 2) = 5.0;
    const Policy pi = spibb_policy(q, est, f);
    EXPECT_DOUBLE_EQ(pi.prob(0, 2), 0.1);
    EXPECT_DOUBLE_EQ(pi.prob(0, 1), 0.9);
    EXPECT_DOUBLE_EQ(pi.prob(0, 0), 0.0);
    // No supported action at state 1: the estimated behavior row, uniform here.
    EXPECT_DOUBLE_EQ(pi.prob(1, 0), 1.0 / 3.0);
}

TEST(Reduction, ZeroThresholdEqualsUnconstrained) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset d = random_dataset(seed, 500);
        const SupportFilter ones = SupportFilter::all_ones(d.num_states, d.num_actions);
        auto qc = AlgorithmConfig::q_iteration(0.9, 30);
        qc.record_q = true;
        const auto a = mbs_qi(d, ones, qc);
        const auto b = fqi(d, qc);
        ASSERT_EQ(a.trace.q.size(), b.trace.q.size());
        for (std::size_t t = 0; t < a.trace.q.size(); ++t) EXPECT_EQ(a.trace.q[t], b.trace.q[t]);
        auto pc = AlgorithmConfig::policy_iteration(0.9, 4, 10);
        pc.record_q = true;
        const auto c = mbs_pi(d, ones, pc);
        const auto e = api(d, pc);
        EXPECT_EQ(c.trace.q, e.trace.q);
        EXPECT_EQ(c.policy, e.policy);
    }
}

TEST(Reduction, BcqlAtZeroMatchesFqiValues) {
    const Dataset d = random_dataset(3, 400);
    const auto a = bcql(d, estimate_density(d), 0.0, AlgorithmConfig::q_iteration(0.9, 40));
    const auto b = fqi(d, AlgorithmConfig::q_iteration(0.9, 40));
    EXPECT_LE(max_abs_diff(a.q, b.q), 1e-12);
}

TEST(Backups, ConstrainedOperatorsContract) {
    const Dataset d = random_dataset(7, 800);
    const EmpiricalModel model(d);
    const SupportFilter f = build_filter(estimate_density(d), 0.02);
    const Policy pi = random_policy(11, d.num_states, d.num_actions);
    const auto tables = random_tables(13, 8, d.num_states, d.num_actions, 10.0);
    for (std::size_t i = 0; i + 1 < tables.size(); ++i) {
        const double gap = max_abs_diff(tables[i], tables[i + 1]);
        EXPECT_LE(max_abs_diff(constrained_opt_backup(tables[i], model, f, 0.9),
                               constrained_opt_backup(tables[i + 1], model, f, 0.9)),
                  0.9 * gap + 1e-12);
        EXPECT_LE(max_abs_diff(constrained_eval_backup(tables[i], pi, model, f, 0.9),
                               constrained_eval_backup(tables[i + 1], pi, model, f, 0.9)),
                  0.9 * gap + 1e-12);
    }
}

TEST(Backups, DatasetAndModelOverloadsAgree) {
    const Dataset d = random_dataset(2, 300);
    const SupportFilter f = build_filter(estimate_density(d), 0.01);
    const QTable g = random_tables(4, 1, d.num_states, d.num_actions, 3.0).front();
    EXPECT_EQ(constrained_opt_backup(g, d, f, 0.95), constrained_opt_backup(g, EmpiricalModel(d), f, 0.95));
}

TEST(Backups, UnsampledPairsStayAtZero) {
    Dataset d;
    d.num_states = 3;
    d.num_actions = 2;
    d.transitions = {{0, 0, 1.0, 1}, {1, 1, 0.5, 0}};
    const QTable f(3, 2, 7.0);
    const QTable out = empirical_opt_backup(f, EmpiricalModel(d), 0.5);
    EXPECT_EQ(out(0, 1), kUnsampledValue);
    EXPECT_EQ(out(2, 0), kUnsampledValue);
    EXPECT_DOUBLE_EQ(out(0, 0), 1.0 + 0.5 * 7.0);
}

TEST(Properties, IteratesStayWithinValueBounds) {
    const Dataset d = random_dataset(9, 1000, 6, 3, 0.95);
    const double v_max = 1.0 / (1.0 - 0.95);
    auto qc = AlgorithmConfig::q_iteration(0.95, 200);
    qc.record_q = true;
    const DensityEstimate est = estimate_density(d);
    for (const auto& r : {mbs_qi(d, build_filter(est, 0.01), qc), fqi(d, qc), spibb(d, est, build_filter(est, 0.01), qc),
                          bcql(d, est, 0.1, qc)}) {
        for (const auto& q : r.trace.q)
            for (double x : q.values()) {
                EXPECT_GE(x, 0.0);
                EXPECT_LE(x, v_max + 1e-9);
            }
    }
}

TEST(Properties, LargerThresholdGivesSmallerValues) {
    const Dataset d = random_dataset(12, 2000);
    const DensityEstimate est = estimate_density(d);
    const auto qc = AlgorithmConfig::q_iteration(0.9, 100);
    QTable prev = mbs_qi(d, build_filter(est, 0.0), qc).q;
    for (double b : {0.005, 0.02, 0.05, 0.1}) {
        const QTable cur = mbs_qi(d, build_filter(est, b), qc).q;
        for (std::size_t i = 0; i < cur.size(); ++i) EXPECT_LE(cur.values()[i], prev.values()[i] + 1e-12);
        prev = cur;
    }
}

TEST(Properties, EmptySupportGivesImmediateReward) {
    const Dataset d = bandit_data();
    const auto r = mbs_qi(d, SupportFilter::all_zeros(2, 3), AlgorithmConfig::q_iteration(0.9, 10));
    EXPECT_DOUBLE_EQ(r.q(0, 2), 0.6);
    EXPECT_EQ(r.policy.action(0), 0u);
}

TEST(Algorithms, FqiConvergesToOptimalWithAmpleData) {
    const TabularMdp m = random_mdp(21, 5, 2, 0.8);
    const Dataset d = generate_dataset(m, Policy::uniform(5, 2), 200000, DatasetMode::iid_occupancy, 4);
    const auto r = fqi(d, AlgorithmConfig::q_iteration(0.8, 200));
    const auto vi = exact_value_iteration(m, 1e-12);
    EXPECT_LE(max_abs_diff(r.q, vi.q), 0.1);
}

TEST(Algorithms, MbsSolvesCombinationLockAtModerateData) {
    const auto [m, mu] = build_combination_lock_mdp({});
    const Dataset d = generate_dataset(m, mu, 1000, DatasetMode::trajectory_pool, 1);
    const SupportFilter f = build_filter(estimate_density(d), 0.01);
    const double v_star = std::pow(0.999, 9);
    EXPECT_NEAR(policy_value(m, mbs_qi(d, f, AlgorithmConfig::q_iteration(0.999, 100)).policy, 1e-12), v_star, 1e-9);
    EXPECT_NEAR(policy_value(m, mbs_pi(d, f, AlgorithmConfig::policy_iteration(0.999)).policy, 1e-12), v_star, 1e-9);
}

TEST(Algorithms, EvaluatorAndTraceCsv) {
    const Dataset d = bandit_data();
    auto cfg = AlgorithmConfig::q_iteration(0.9, 10);
    cfg.eval_every = 4;
    cfg.evaluator = [](const Policy& pi) { return static_cast<double>(pi.action(0)); };
    const auto r = fqi(d, cfg);
    EXPECT_EQ(r.trace.value_iterations, (std::vector<std::size_t>{4, 8, 10}));
    std::ostringstream out;
    write_trace_csv(out, r.trace);
    EXPECT_EQ(out.str(), "iteration,value\n4,1\n8,1\n10,1\n");
}

TEST(Algorithms, ConfigValidation) {
    AlgorithmConfig cfg = AlgorithmConfig::q_iteration(0.9, 0);
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(fqi(bandit_data(), AlgorithmConfig::q_iteration(1.2, 3)), ConfigError);
}
