#include "mbs/dataset.hpp"
#include "mbs/environments.hpp"
#include "mbs/errors.hpp"
#include "mbs/solve.hpp"
#include "mbs/theory.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace mbs;

TEST(Dataset, IidSamplesMatchOccupancy) {
    const TabularMdp m = random_mdp(4, 4, 2, 0.9);
    const Policy pi = random_policy(5, 4, 2);
    const std::size_t n = 200000;
    const Dataset d = generate_dataset(m, pi, n, DatasetMode::iid_occupancy, 17);
    ASSERT_EQ(d.n(), n);
    const auto eta = oracle::occupancy(m, pi);
    std::vector<double> freq(eta.size(), 0.0);
    for (const auto& t : d.transitions) freq[t.s * 2 + t.a] += 1.0 / n;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double se = std::sqrt(eta[i] * (1.0 - eta[i]) / n);
        EXPECT_LE(std::abs(freq[i] - eta[i]), 3.0 * se + 1e-12) << "pair " << i;
    }
}

TEST(Dataset, TrajectoryPoolFollowsEpisodes) {
    const auto [m, mu] = build_combination_lock_mdp({});
    const Dataset d = generate_dataset(m, mu, 1000, DatasetMode::trajectory_pool, 3);
    ASSERT_EQ(d.n(), 1000u);
    EXPECT_EQ(d.transitions.front().s, 0u);
    for (std::size_t i = 0; i + 1 < d.n(); ++i) {
        const auto& t = d.transitions[i];
        if (!m.is_terminal(t.s_next)) EXPECT_EQ(d.transitions[i + 1].s, t.s_next);
        else EXPECT_EQ(d.transitions[i + 1].s, 0u);
        EXPECT_GT(m.transition_prob(t.s, t.a, t.s_next), 0.0);
    }
    EXPECT_EQ(d.provenance.mode, "trajectory_pool");
}

TEST(Dataset, SameSeedSameData) {
    const auto [m, mu] = build_rare_transition_mdp({});
    EXPECT_EQ(generate_dataset(m, mu, 300, DatasetMode::trajectory_pool, 9),
              generate_dataset(m, mu, 300, DatasetMode::trajectory_pool, 9));
    EXPECT_NE(generate_dataset(m, mu, 300, DatasetMode::trajectory_pool, 9),
              generate_dataset(m, mu, 300, DatasetMode::trajectory_pool, 10));
    EXPECT_THROW(generate_dataset(m, mu, 0, DatasetMode::iid_occupancy, 1), ConfigError);
}

TEST(Density, CountsMatchRecount) {
    const TabularMdp m = random_mdp(8, 5, 3, 0.9);
    const Dataset d = generate_dataset(m, random_policy(1, 5, 3), 2000, DatasetMode::iid_occupancy, 2);
    const DensityEstimate est = estimate_density(d);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> recount;
    std::map<std::size_t, std::size_t> per_state;
    for (const auto& t : d.transitions) {
        ++recount[{t.s, t.a}];
        ++per_state[t.s];
    }
    for (std::size_t s = 0; s < 5; ++s) {
        for (std::size_t a = 0; a < 3; ++a) {
            const std::size_t c = recount.count({s, a}) ? recount[{s, a}] : 0;
            EXPECT_EQ(est.count(s, a), c);
            EXPECT_DOUBLE_EQ(est.joint(s, a), static_cast<double>(c) / 2000.0);
            if (per_state[s]) EXPECT_DOUBLE_EQ(est.conditional(s, a), static_cast<double>(c) / per_state[s]);
        }
    }
}

TEST(Density, UnseenStatesGetUniformConditional) {
    Dataset d;
    d.num_states = 3;
    d.num_actions = 2;
    d.transitions = {{0, 1, 0.0, 1}, {0, 1, 0.0, 1}, {1, 0, 1.0, 0}};
    const DensityEstimate est = estimate_density(d);
    EXPECT_DOUBLE_EQ(est.conditional(2, 0), 0.5);
    EXPECT_DOUBLE_EQ(est.conditional(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(est.joint(2, 1), 0.0);
}

TEST(Filter, ThresholdIsInclusive) {
    Dataset d;
    d.num_states = 2;
    d.num_actions = 2;
    d.transitions = {{0, 0, 0.0, 1}, {0, 0, 0.0, 1}, {0, 1, 0.0, 1}, {1, 0, 0.0, 0}};
    const DensityEstimate est = estimate_density(d);
    const SupportFilter f = build_filter(est, 0.25);
    EXPECT_TRUE(f(0, 0));
    EXPECT_TRUE(f(0, 1));
    EXPECT_TRUE(f(1, 0));
    EXPECT_FALSE(f(1, 1));
    EXPECT_EQ(build_filter(est, 0.0).support_size(), 4u);
    EXPECT_EQ(build_filter(est, 0.5).support_size(), 1u);
    EXPECT_THROW(build_filter(est, -1.0), ConfigError);
}

TEST(Filter, SupportShrinksAsThresholdGrows) {
    const TabularMdp m = random_mdp(2, 6, 3, 0.9);
    const Dataset d = generate_dataset(m, random_policy(3, 6, 3), 5000, DatasetMode::iid_occupancy, 4);
    const DensityEstimate est = estimate_density(d);
    std::size_t prev = est.num_states() * est.num_actions() + 1;
    for (double b : {0.0, 0.001, 0.01, 0.05, 0.1, 0.5}) {
        const SupportFilter f = build_filter(est, b);
        EXPECT_LE(f.support_size(), prev);
        prev = f.support_size();
    }
}

TEST(Filter, Diagnostics) {
    Dataset d;
    d.num_states = 2;
    d.num_actions = 2;
    d.transitions = {{0, 0, 0.0, 1}, {0, 0, 0.0, 1}, {1, 1, 0.0, 0}};
    const SupportFilter f = build_filter(estimate_density(d), 0.5);
    const auto diag = filter_diagnostics(f, d, Policy::deterministic({0, 0}, 2));
    EXPECT_NEAR(diag.policy_support_rate, 2.0 / 3.0, 1e-15);
    EXPECT_EQ(diag.support_size, 1u);
    EXPECT_NEAR(diag.data_in_support, 2.0 / 3.0, 1e-15);
}

TEST(DatasetIo, RoundTrip) {
    const auto [m, mu] = build_rare_transition_mdp({});
    const Dataset d = generate_dataset(m, mu, 100, DatasetMode::trajectory_pool, 5, "uniform");
    std::stringstream ss;
    write_dataset(ss, d);
    const Dataset back = read_dataset(ss);
    EXPECT_EQ(back, d);
    EXPECT_EQ(back.provenance.behavior_id, "uniform");
    EXPECT_EQ(back.provenance.seed, 5u);
}

TEST(DatasetIo, ParseErrorsCarryLineNumbers) {
    std::istringstream bad(
        "# mbsrl-dataset 1\n# mdp_id=x behavior_id=y seed=1 mode=iid_occupancy states=2 actions=2 n=2\n0 0 1 1\n0 7 1 1\n");
    try {
        read_dataset(bad);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    std::istringstream short_data(
        "# mbsrl-dataset 1\n# mdp_id=x behavior_id=y seed=1 mode=iid_occupancy states=2 actions=2 n=3\n0 0 1 1\n");
    EXPECT_THROW(read_dataset(short_data), ParseError);
}
