#include "mbs/solve.hpp"
#include "mbs/theory.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace mbs;

TEST(Augment, AddsAbsorbingStateAndAction) {
    const TabularMdp m = random_mdp(1, 3, 2, 0.9);
    const AugmentedMdp aug = augment(m);
    EXPECT_EQ(aug.mdp.num_states(), 4u);
    EXPECT_EQ(aug.mdp.num_actions(), 3u);
    for (StateId s = 0; s < 4; ++s) {
        EXPECT_DOUBLE_EQ(aug.mdp.transition_prob(s, aug.a_abs, aug.s_abs), 1.0);
        EXPECT_DOUBLE_EQ(aug.mdp.reward_mean(s, aug.a_abs), 0.0);
    }
    for (StateId s = 0; s < 3; ++s)
        for (ActionId a = 0; a < 2; ++a) {
            EXPECT_DOUBLE_EQ(aug.mdp.reward_mean(s, a), m.reward_mean(s, a));
            EXPECT_DOUBLE_EQ(aug.mdp.transition_prob(s, a, aug.s_abs), 0.0);
        }
}

TEST(Projection, MovesUnsupportedMassToAbsorbingAction) {
    const TabularMdp m = random_mdp(2, 2, 2, 0.9);
    const AugmentedMdp aug = augment(m);
    Table probs(2, 2);
    probs(0, 0) = 0.3;
    probs(0, 1) = 0.7;
    probs(1, 0) = 1.0;
    const Policy pi = lift_policy(Policy::stochastic(probs), aug);
    const SupportFilter zeta = extend_filter(SupportFilter(2, 2, 0.0, {1, 0, 1, 1}), aug);
    const Policy xi = project_policy(pi, zeta);
    EXPECT_DOUBLE_EQ(xi.prob(0, 0), 0.3);
    EXPECT_DOUBLE_EQ(xi.prob(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(xi.prob(0, aug.a_abs), 0.7);
    EXPECT_DOUBLE_EQ(xi.prob(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(xi.prob(aug.s_abs, aug.a_abs), 1.0);
    EXPECT_FALSE(zeta(aug.s_abs, 0));
    EXPECT_FALSE(zeta(0, aug.a_abs));
}

TEST(FixedPoint, FullSupportGivesPolicyValue) {
    const TabularMdp m = random_mdp(3, 4, 2, 0.9);
    const Policy pi = random_policy(4, 4, 2);
    const QTable f = constrained_fixed_point(m, pi, SupportFilter::all_ones(4, 2), 1e-12);
    const auto ref = oracle::q_values(m, pi);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(f.values()[i], ref[i], 1e-10);
}

TEST(FixedPoint, MatchesProjectedPolicyOnAuxiliaryMdp) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const RandomInstance r = random_instance(seed);
        const AugmentedMdp aug = augment(r.mdp);
        const SupportFilter zeta = extend_filter(r.filter, aug);
        const QTable f = constrained_fixed_point(aug.mdp, lift_policy(r.pi, aug), zeta, 1e-12);
        const auto ref = oracle::q_values(aug.mdp, project_policy(lift_policy(r.pi, aug), zeta));
        for (StateId s = 0; s < aug.base_states; ++s)
            for (ActionId a = 0; a < aug.base_actions; ++a)
                EXPECT_NEAR(f(s, a), ref[s * aug.mdp.num_actions() + a], 1e-8);
    }
}

TEST(EscapeProbability, ZeroUnderFullSupportAndOneUnderNone) {
    const RandomInstance r = random_instance(5);
    const std::size_t S = r.mdp.num_states(), A = r.mdp.num_actions();
    EXPECT_NEAR(escape_probability(r.mdp, r.pi, SupportFilter::all_ones(S, A)), 0.0, 1e-12);
    EXPECT_NEAR(escape_probability(r.mdp, r.pi, SupportFilter::all_zeros(S, A)), 1.0, 1e-12);
}

TEST(EscapeProbability, MatchesOccupancyOracle) {
    const RandomInstance r = random_instance(8);
    const auto eta = oracle::occupancy(r.mdp, r.pi);
    double expected = 0.0;
    for (StateId s = 0; s < r.mdp.num_states(); ++s)
        for (ActionId a = 0; a < r.mdp.num_actions(); ++a)
            if (!r.filter(s, a)) expected += eta[s * r.mdp.num_actions() + a];
    EXPECT_NEAR(escape_probability(r.mdp, r.pi, r.filter), expected, 1e-10);
}

TEST(Checks, PassOnRandomInstances) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const RandomInstance r = random_instance(seed);
        EXPECT_TRUE(check_fixed_point(r.mdp, r.pi, r.filter, 1e-8).passed);
        EXPECT_TRUE(check_projection_value(r.mdp, r.pi, r.filter, 1e-9).passed);
        EXPECT_TRUE(check_escape_bound(r.mdp, r.pi, r.filter, 1e-9).passed);
        const auto tables = random_tables(seed, 3, r.mdp.num_states() + 1, r.mdp.num_actions() + 1, 1.0);
        EXPECT_TRUE(check_operator_projection_equiv(r.mdp, r.pi, r.filter, tables).passed);
    }
}

TEST(Checks, ProjectionValueIsTightWhenPolicyStaysInSupport) {
    const TabularMdp m = random_mdp(6, 3, 2, 0.9);
    const Policy pi = Policy::deterministic({0, 0, 0}, 2);
    const SupportFilter f(3, 2, 0.0, {1, 0, 1, 0, 1, 0});
    const CheckReport c = check_projection_value(m, pi, f, 1e-9);
    EXPECT_TRUE(c.passed);
    EXPECT_NEAR(c.lhs, c.rhs, 1e-9);
    EXPECT_LE(escape_probability(m, pi, f), 1e-12);
}

TEST(Membership, ComparesEscapeProbability) {
    const RandomInstance r = random_instance(2);
    const double eps = escape_probability(r.mdp, r.pi, r.filter);
    EXPECT_TRUE(membership(r.mdp, r.pi, r.filter, eps + 1e-9).member);
    if (eps > 1e-6) EXPECT_FALSE(membership(r.mdp, r.pi, r.filter, eps / 2).member);
}

TEST(RandomInstance, IsReproducible) {
    const RandomInstance a = random_instance(77), b = random_instance(77);
    EXPECT_EQ(a.mdp, b.mdp);
    EXPECT_EQ(a.pi, b.pi);
    EXPECT_EQ(a.filter, b.filter);
    EXPECT_GE(a.mdp.num_states(), 2u);
    EXPECT_LE(a.mdp.num_states(), 8u);
}
