#pragma once

// Reference computations used only by the tests. Everything here is solved
// directly (dense linear algebra, enumeration) rather than by iteration.

#include "mbs/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting; solves A x = b.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (std::abs(a[p][c]) < 1e-300) throw std::runtime_error("singular system");
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= m * a[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// Dense P_pi(s, s').
inline Matrix transition_matrix(const mbs::TabularMdp& m, const mbs::Policy& pi) {
    const std::size_t S = m.num_states();
    Matrix p(S, std::vector<double>(S, 0.0));
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < m.num_actions(); ++a)
            for (const auto& o : m.successors(s, a)) p[s][o.state] += pi.prob(s, a) * o.prob;
    return p;
}

// V^pi = (I - gamma P_pi)^{-1} r_pi
inline std::vector<double> state_values(const mbs::TabularMdp& m, const mbs::Policy& pi) {
    const std::size_t S = m.num_states();
    Matrix a = transition_matrix(m, pi);
    std::vector<double> r(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t k = 0; k < S; ++k) a[s][k] = (s == k ? 1.0 : 0.0) - m.gamma() * a[s][k];
        for (std::size_t act = 0; act < m.num_actions(); ++act) r[s] += pi.prob(s, act) * m.reward_mean(s, act);
    }
    return solve(a, r);
}

inline std::vector<double> q_values(const mbs::TabularMdp& m, const mbs::Policy& pi) {
    const auto v = state_values(m, pi);
    std::vector<double> q(m.num_states() * m.num_actions());
    for (std::size_t s = 0; s < m.num_states(); ++s)
        for (std::size_t a = 0; a < m.num_actions(); ++a) {
            double x = m.reward_mean(s, a);
            for (const auto& o : m.successors(s, a)) x += m.gamma() * o.prob * v[o.state];
            q[s * m.num_actions() + a] = x;
        }
    return q;
}

inline double value(const mbs::TabularMdp& m, const mbs::Policy& pi) {
    const auto v = state_values(m, pi);
    double total = 0.0;
    for (std::size_t s = 0; s < m.num_states(); ++s) total += m.initial_dist()[s] * v[s];
    return total;
}

// d(s) = (1 - gamma) rho^T (I - gamma P_pi)^{-1}; eta(s,a) = d(s) pi(a|s).
inline std::vector<double> occupancy(const mbs::TabularMdp& m, const mbs::Policy& pi) {
    const std::size_t S = m.num_states();
    const Matrix p = transition_matrix(m, pi);
    Matrix at(S, std::vector<double>(S, 0.0));
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < S; ++j) at[i][j] = (i == j ? 1.0 : 0.0) - m.gamma() * p[j][i];
    std::vector<double> rho = m.initial_dist();
    auto d = solve(at, rho);
    std::vector<double> eta(S * m.num_actions());
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < m.num_actions(); ++a) eta[s * m.num_actions() + a] = (1.0 - m.gamma()) * d[s] * pi.prob(s, a);
    return eta;
}

// Best value over every deterministic stationary policy.
inline double best_deterministic_value(const mbs::TabularMdp& m) {
    const std::size_t S = m.num_states(), A = m.num_actions();
    std::vector<std::size_t> acts(S, 0);
    double best = -1e300;
    while (true) {
        best = std::max(best, value(m, mbs::Policy::deterministic(acts, A)));
        std::size_t i = 0;
        while (i < S && ++acts[i] == A) acts[i++] = 0;
        if (i == S) break;
    }
    return best;
}

}  // namespace oracle
