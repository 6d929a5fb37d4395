#include "mbs/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mbs {

namespace {

constexpr double kProbTol = 1e-12;

std::string pair_label(StateId s, ActionId a) {
    std::ostringstream out;
    out << "(s=" << s << ", a=" << a << ")";
    return out.str();
}

}  // namespace

double max_abs_diff(const Table& a, const Table& b) {
    if (!a.same_shape(b)) throw ConfigError("max_abs_diff: table shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

Policy Policy::deterministic(std::vector<ActionId> actions, std::size_t num_actions) {
    Policy p;
    p.probs_ = Table(actions.size(), num_actions, 0.0);
    for (StateId s = 0; s < actions.size(); ++s) {
        if (actions[s] >= num_actions) {
            throw ConfigError("deterministic policy: action out of range at state " + std::to_string(s));
        }
        p.probs_(s, actions[s]) = 1.0;
    }
    p.actions_ = std::move(actions);
    p.deterministic_ = true;
    return p;
}

Policy Policy::stochastic(Table probabilities) {
    for (StateId s = 0; s < probabilities.num_states(); ++s) {
        double total = 0.0;
        for (double x : probabilities.row(s)) {
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw ConfigError("stochastic policy: negative or non-finite probability at state " +
                                  std::to_string(s));
            }
            total += x;
        }
        if (std::abs(total - 1.0) > kProbTol) {
            throw ConfigError("stochastic policy: row " + std::to_string(s) + " sums to " + std::to_string(total));
        }
    }
    Policy p;
    p.probs_ = std::move(probabilities);
    return p;
}

Policy Policy::uniform(std::size_t num_states, std::size_t num_actions) {
    Policy p;
    p.probs_ = Table(num_states, num_actions, 1.0 / static_cast<double>(num_actions));
    return p;
}

ActionId Policy::action(StateId s) const {
    if (!deterministic_) throw ConfigError("Policy::action called on a stochastic policy");
    return actions_[s];
}

ActionId argmax_lowest(std::span<const double> values) noexcept {
    ActionId best = 0;
    for (ActionId a = 1; a < values.size(); ++a) {
        if (values[a] > values[best]) best = a;
    }
    return best;
}

Policy greedy_policy(const QTable& q) {
    std::vector<ActionId> actions(q.num_states());
    for (StateId s = 0; s < q.num_states(); ++s) actions[s] = argmax_lowest(q.row(s));
    return Policy::deterministic(std::move(actions), q.num_actions());
}

Policy epsilon_greedy(const QTable& q, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
    Table probs(q.num_states(), q.num_actions(), epsilon / static_cast<double>(q.num_actions()));
    for (StateId s = 0; s < q.num_states(); ++s) probs(s, argmax_lowest(q.row(s))) += 1.0 - epsilon;
    return Policy::stochastic(std::move(probs));
}

double TabularMdp::transition_prob(StateId s, ActionId a, StateId next) const noexcept {
    for (const auto& o : successors(s, a)) {
        if (o.state == next) return o.prob;
    }
    return 0.0;
}

MdpBuilder::MdpBuilder(std::size_t num_states, std::size_t num_actions, double gamma)
    : num_states_(num_states),
      num_actions_(num_actions),
      gamma_(gamma),
      terminal_(num_states, 0),
      transitions_(num_states * num_actions),
      rewards_(num_states * num_actions) {
    if (num_states == 0 || num_actions == 0) throw ConfigError("MDP needs at least one state and one action");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
}

MdpBuilder& MdpBuilder::name(std::string name) {
    name_ = std::move(name);
    return *this;
}

MdpBuilder& MdpBuilder::r_max(double r_max) {
    r_max_ = r_max;
    return *this;
}

MdpBuilder& MdpBuilder::initial(std::vector<double> dist) {
    initial_ = std::move(dist);
    return *this;
}

MdpBuilder& MdpBuilder::initial_state(StateId s) {
    initial_.assign(num_states_, 0.0);
    initial_.at(s) = 1.0;
    return *this;
}

MdpBuilder& MdpBuilder::terminal(StateId s, bool flag) {
    terminal_.at(s) = flag ? 1 : 0;
    return *this;
}

MdpBuilder& MdpBuilder::transition(StateId s, ActionId a, std::vector<Outcome> outcomes) {
    if (s >= num_states_ || a >= num_actions_) throw ConfigError("transition: index out of range " + pair_label(s, a));
    std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& x, const Outcome& y) { return x.state < y.state; });
    std::vector<Outcome> merged;
    for (const auto& o : outcomes) {
        if (o.state >= num_states_) throw ConfigError("transition: next state out of range " + pair_label(s, a));
        if (o.prob == 0.0) continue;
        if (!merged.empty() && merged.back().state == o.state) {
            merged.back().prob += o.prob;
        } else {
            merged.push_back(o);
        }
    }
    transitions_[s * num_actions_ + a] = std::move(merged);
    return *this;
}

MdpBuilder& MdpBuilder::deterministic_transition(StateId s, ActionId a, StateId next) {
    return transition(s, a, {{next, 1.0}});
}

MdpBuilder& MdpBuilder::reward(StateId s, ActionId a, std::vector<RewardAtom> atoms) {
    if (s >= num_states_ || a >= num_actions_) throw ConfigError("reward: index out of range " + pair_label(s, a));
    std::vector<RewardAtom> kept;
    for (const auto& atom : atoms) {
        if (atom.prob != 0.0) kept.push_back(atom);
    }
    rewards_[s * num_actions_ + a] = std::move(kept);
    return *this;
}

MdpBuilder& MdpBuilder::point_reward(StateId s, ActionId a, double value) {
    return reward(s, a, {{value, 1.0}});
}

MdpBuilder& MdpBuilder::bernoulli_reward(StateId s, ActionId a, double p, double value) {
    return reward(s, a, {{0.0, 1.0 - p}, {value, p}});
}

MdpBuilder& MdpBuilder::absorbing(StateId s) {
    for (ActionId a = 0; a < num_actions_; ++a) {
        deterministic_transition(s, a, s);
        point_reward(s, a, 0.0);
    }
    return *this;
}

TabularMdp MdpBuilder::build() const {
    TabularMdp m;
    m.name_ = name_;
    m.num_states_ = num_states_;
    m.num_actions_ = num_actions_;
    m.gamma_ = gamma_;
    m.terminal_ = terminal_;

    if (initial_.size() != num_states_) throw ConfigError("initial distribution has wrong length");
    double init_total = 0.0;
    for (double p : initial_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("initial distribution has a negative entry");
        init_total += p;
    }
    if (std::abs(init_total - 1.0) > kProbTol) throw ConfigError("initial distribution does not sum to 1");
    m.initial_ = initial_;

    const std::size_t pairs = num_states_ * num_actions_;
    m.outcome_offsets_.assign(pairs + 1, 0);
    m.atom_offsets_.assign(pairs + 1, 0);
    m.reward_mean_.assign(pairs, 0.0);

    double observed_max = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const StateId s = i / num_actions_;
        const ActionId a = i % num_actions_;

        std::vector<Outcome> row = transitions_[i];
        if (row.empty()) row.push_back({s, 1.0});
        double total = 0.0;
        for (const auto& o : row) {
            if (!(o.prob > 0.0) || !std::isfinite(o.prob)) {
                throw ConfigError("negative or non-finite transition probability at " + pair_label(s, a));
            }
            total += o.prob;
        }
        if (std::abs(total - 1.0) > kProbTol) {
            throw ConfigError("transition row " + pair_label(s, a) + " sums to " + std::to_string(total));
        }
        m.outcomes_.insert(m.outcomes_.end(), row.begin(), row.end());
        m.outcome_offsets_[i + 1] = m.outcomes_.size();

        std::vector<RewardAtom> atoms = rewards_[i];
        if (atoms.empty()) atoms.push_back({0.0, 1.0});
        double atom_total = 0.0;
        double mean = 0.0;
        for (const auto& atom : atoms) {
            if (!(atom.prob > 0.0) || !std::isfinite(atom.value)) {
                throw ConfigError("invalid reward atom at " + pair_label(s, a));
            }
            if (atom.value < 0.0) throw ConfigError("negative reward at " + pair_label(s, a));
            atom_total += atom.prob;
            mean += atom.prob * atom.value;
            observed_max = std::max(observed_max, atom.value);
        }
        if (std::abs(atom_total - 1.0) > kProbTol) {
            throw ConfigError("reward distribution at " + pair_label(s, a) + " does not sum to 1");
        }
        m.atoms_.insert(m.atoms_.end(), atoms.begin(), atoms.end());
        m.atom_offsets_[i + 1] = m.atoms_.size();
        m.reward_mean_[i] = mean;
    }

    if (r_max_ < 0.0) {
        m.r_max_ = observed_max;
    } else {
        if (observed_max > r_max_) {
            throw ConfigError("reward " + std::to_string(observed_max) + " exceeds r_max " + std::to_string(r_max_));
        }
        m.r_max_ = r_max_;
    }
    return m;
}

}  // namespace mbs
