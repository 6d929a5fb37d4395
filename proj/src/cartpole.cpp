#include "mbs/cartpole.hpp"

#include "mbs/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mbs {

CartPoleStep cartpole_step_with_force(const CartPoleState& state, double force, const CartPolePhysics& p) {
    const auto [x, x_dot, theta, theta_dot] = state;
    const double total_mass = p.cart_mass + p.pole_mass;
    const double polemass_length = p.pole_mass * p.half_length;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);

    const double temp = (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (p.gravity * sin_t - cos_t * temp) / (p.half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;

    CartPoleStep out;
    out.state = {x + p.dt * x_dot, x_dot + p.dt * x_acc, theta + p.dt * theta_dot, theta_dot + p.dt * theta_acc};
    out.done = std::abs(out.state[0]) > p.x_threshold || std::abs(out.state[2]) > p.theta_threshold;
    return out;
}

CartPoleStep cartpole_continuous_step(const CartPoleState& state, ActionId action, const CartPolePhysics& physics) {
    return cartpole_step_with_force(state, action == 1 ? physics.force : -physics.force, physics);
}

void validate(const CartPoleDiscretization& cfg) {
    if (cfg.bins_per_dim < 1) throw ConfigError("bins_per_dim must be at least 1");
    for (const auto& [lo, hi] : cfg.dim_ranges) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) throw ConfigError("cart-pole ranges must be finite and ordered");
    }
    if (cfg.max_steps < 1) throw ConfigError("max_steps must be at least 1");
    if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (!(cfg.start_box > 0.0)) throw ConfigError("start_box must be positive");
}

std::size_t cartpole_num_bins(const CartPoleDiscretization& cfg) {
    const std::size_t k = cfg.bins_per_dim;
    return k * k * k * k;
}

namespace {

double width(const CartPoleDiscretization& cfg, std::size_t d) {
    return (cfg.dim_ranges[d].second - cfg.dim_ranges[d].first) / static_cast<double>(cfg.bins_per_dim);
}

std::size_t dim_index(const CartPoleDiscretization& cfg, std::size_t d, double v) {
    const double raw = std::floor((v - cfg.dim_ranges[d].first) / width(cfg, d));
    if (!(raw >= 0.0)) return 0;
    return std::min(static_cast<std::size_t>(raw), cfg.bins_per_dim - 1);
}

CartPoleState uniform_start(const CartPoleDiscretization& cfg, Rng& rng) {
    CartPoleState s;
    for (double& v : s) v = rng.uniform(-cfg.start_box, cfg.start_box);
    return s;
}

ActionId choose(const Policy& pi, StateId s, Rng& rng) {
    return pi.is_deterministic() ? pi.actions()[s] : rng.categorical(pi.row(s));
}

void check_policy(const CartPoleDiscretization& cfg, const Policy& pi) {
    if (pi.num_states() != cartpole_num_bins(cfg) + 1 || pi.num_actions() != 2) {
        throw ConfigError("cart-pole policy must cover every bin plus the terminal state, with 2 actions");
    }
}

}  // namespace

StateId cartpole_bin(const CartPoleDiscretization& cfg, const CartPoleState& state) {
    StateId bin = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < 4; ++d) {
        bin += dim_index(cfg, d, state[d]) * stride;
        stride *= cfg.bins_per_dim;
    }
    return bin;
}

std::array<std::size_t, 4> cartpole_bin_coords(const CartPoleDiscretization& cfg, StateId bin) {
    std::array<std::size_t, 4> c{};
    for (std::size_t d = 0; d < 4; ++d) {
        c[d] = bin % cfg.bins_per_dim;
        bin /= cfg.bins_per_dim;
    }
    return c;
}

std::pair<CartPoleState, CartPoleState> cartpole_bin_box(const CartPoleDiscretization& cfg, StateId bin) {
    const auto c = cartpole_bin_coords(cfg, bin);
    CartPoleState lo{}, hi{};
    for (std::size_t d = 0; d < 4; ++d) {
        lo[d] = cfg.dim_ranges[d].first + width(cfg, d) * static_cast<double>(c[d]);
        hi[d] = c[d] + 1 == cfg.bins_per_dim ? cfg.dim_ranges[d].second : lo[d] + width(cfg, d);
    }
    return {lo, hi};
}

std::vector<double> cartpole_initial_bin_dist(const CartPoleDiscretization& cfg) {
    validate(cfg);
    const std::size_t k = cfg.bins_per_dim;
    // per-dimension mass of each bin index; edge bins absorb everything beyond the range
    std::array<std::vector<double>, 4> mass;
    const double box = 2.0 * cfg.start_box;
    for (std::size_t d = 0; d < 4; ++d) {
        mass[d].assign(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            double lo = cfg.dim_ranges[d].first + width(cfg, d) * static_cast<double>(i);
            double hi = lo + width(cfg, d);
            if (i == 0) lo = -INFINITY;
            if (i + 1 == k) hi = INFINITY;
            const double overlap = std::min(hi, cfg.start_box) - std::max(lo, -cfg.start_box);
            mass[d][i] = std::max(overlap, 0.0) / box;
        }
    }
    std::vector<double> out(cartpole_num_bins(cfg), 0.0);
    for (StateId bin = 0; bin < out.size(); ++bin) {
        const auto c = cartpole_bin_coords(cfg, bin);
        out[bin] = mass[0][c[0]] * mass[1][c[1]] * mass[2][c[2]] * mass[3][c[3]];
    }
    return out;
}

TabularMdp build_cartpole_mdp(const CartPoleDiscretization& cfg, std::size_t sampling_episodes, std::uint64_t rng_seed) {
    validate(cfg);
    if (sampling_episodes < 1) throw ConfigError("sampling_episodes must be at least 1");
    const std::size_t bins = cartpole_num_bins(cfg);
    const StateId terminal = bins;
    const double weight = 1.0 / static_cast<double>(sampling_episodes);

    std::vector<double> initial = cartpole_initial_bin_dist(cfg);
    std::vector<std::uint8_t> reached(bins, 0);
    for (StateId s = 0; s < bins; ++s) reached[s] = initial[s] > 0.0 ? 1 : 0;

    std::vector<std::vector<Outcome>> rows(bins * 2);
    for (StateId s = 0; s < bins; ++s) {
        const auto [lo, hi] = cartpole_bin_box(cfg, s);
        for (ActionId a = 0; a < 2; ++a) {
            Rng rng(derive_seed(rng_seed, {s, a}));
            std::map<StateId, double> freq;
            for (std::size_t k = 0; k < sampling_episodes; ++k) {
                CartPoleState start;
                for (std::size_t d = 0; d < 4; ++d) start[d] = rng.uniform(lo[d], hi[d]);
                const CartPoleStep step = cartpole_continuous_step(start, a, cfg.physics);
                const StateId next = step.done ? terminal : cartpole_bin(cfg, step.state);
                freq[next] += weight;
                if (next != terminal) reached[next] = 1;
            }
            auto& row = rows[s * 2 + a];
            for (const auto& [next, p] : freq) row.push_back({next, p});
        }
    }

    initial.push_back(0.0);
    MdpBuilder b(bins + 1, 2, cfg.gamma);
    b.name("cartpole").r_max(1.0).initial(std::move(initial)).terminal(terminal).absorbing(terminal);
    for (StateId s = 0; s < bins; ++s) {
        if (!reached[s]) {
            b.terminal(s).absorbing(s);
            continue;
        }
        for (ActionId a = 0; a < 2; ++a) {
            auto& row = rows[s * 2 + a];
            // frequencies are multiples of 1/k; rescale to remove rounding drift
            double total = 0.0;
            for (const auto& o : row) total += o.prob;
            for (auto& o : row) o.prob /= total;
            b.transition(s, a, std::move(row)).point_reward(s, a, 1.0);
        }
    }
    return b.build();
}

double cartpole_rollout(const CartPoleDiscretization& cfg, const Policy& pi, std::uint64_t rng_seed) {
    check_policy(cfg, pi);
    Rng rng(rng_seed);
    CartPoleState state = uniform_start(cfg, rng);
    double total = 0.0;
    for (std::size_t t = 0; t < cfg.max_steps; ++t) {
        const ActionId a = choose(pi, cartpole_bin(cfg, state), rng);
        const CartPoleStep step = cartpole_continuous_step(state, a, cfg.physics);
        total += 1.0;
        if (step.done) break;
        state = step.state;
    }
    return total;
}

double cartpole_evaluate(const CartPoleDiscretization& cfg, const Policy& pi, std::size_t episodes,
                         std::uint64_t rng_seed) {
    if (episodes < 1) throw ConfigError("episodes must be at least 1");
    double total = 0.0;
    for (std::size_t i = 0; i < episodes; ++i) total += cartpole_rollout(cfg, pi, derive_seed(rng_seed, {i}));
    return total / static_cast<double>(episodes);
}

Dataset collect_cartpole_dataset(const CartPoleDiscretization& cfg, const Policy& behavior, std::size_t n,
                                 std::uint64_t rng_seed, std::string behavior_id) {
    check_policy(cfg, behavior);
    if (n < 1) throw ConfigError("dataset size must be at least 1");
    const StateId terminal = cartpole_terminal_state(cfg);
    Dataset data;
    data.num_states = terminal + 1;
    data.num_actions = 2;
    data.provenance = {"cartpole", std::move(behavior_id), rng_seed, "continuous_episodes"};
    data.transitions.reserve(n);
    for (std::uint64_t episode = 0; data.transitions.size() < n; ++episode) {
        Rng rng(derive_seed(rng_seed, {episode}));
        CartPoleState state = uniform_start(cfg, rng);
        for (std::size_t t = 0; t < cfg.max_steps && data.transitions.size() < n; ++t) {
            const StateId s = cartpole_bin(cfg, state);
            const ActionId a = choose(behavior, s, rng);
            const CartPoleStep step = cartpole_continuous_step(state, a, cfg.physics);
            data.transitions.push_back({s, a, 1.0, step.done ? terminal : cartpole_bin(cfg, step.state)});
            if (step.done) break;
            state = step.state;
        }
    }
    return data;
}

}  // namespace mbs
