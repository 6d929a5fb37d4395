#include "mbs/dataset.hpp"

#include "mbs/rng.hpp"
#include "mbs/solve.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace mbs {

std::string_view to_string(DatasetMode mode) noexcept {
    switch (mode) {
        case DatasetMode::iid_occupancy: return "iid_occupancy";
        case DatasetMode::trajectory_pool: return "trajectory_pool";
    }
    return "unknown";
}

DatasetMode parse_dataset_mode(std::string_view text) {
    if (text == "iid_occupancy") return DatasetMode::iid_occupancy;
    if (text == "trajectory_pool") return DatasetMode::trajectory_pool;
    throw ConfigError("unknown dataset mode '" + std::string(text) + "'");
}

namespace {

// Inverse-CDF sampling over a fixed weight vector.
class CumulativeSampler {
public:
    explicit CumulativeSampler(std::span<const double> weights) : cdf_(weights.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            cdf_[i] = acc;
        }
    }

    std::size_t draw(Rng& rng) const noexcept {
        const double u = rng.uniform() * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        // skip zero-weight slots that share the cdf value
        return static_cast<std::size_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

std::pair<double, StateId> sample_outcome(const TabularMdp& mdp, StateId s, ActionId a, Rng& rng,
                                          std::vector<double>& scratch) {
    const auto atoms = mdp.reward_dist(s, a);
    scratch.clear();
    for (const auto& atom : atoms) scratch.push_back(atom.prob);
    const double r = atoms[rng.categorical(scratch)].value;
    const auto outcomes = mdp.successors(s, a);
    scratch.clear();
    for (const auto& o : outcomes) scratch.push_back(o.prob);
    return {r, outcomes[rng.categorical(scratch)].state};
}

}  // namespace

Dataset generate_dataset(const TabularMdp& mdp, const Policy& behavior, std::size_t n, DatasetMode mode,
                         std::uint64_t rng_seed, std::string behavior_id, std::size_t max_episode_steps) {
    if (n < 1) throw ConfigError("dataset size must be at least 1");
    Dataset data;
    data.num_states = mdp.num_states();
    data.num_actions = mdp.num_actions();
    data.provenance = {mdp.name().empty() ? "mdp" : mdp.name(), std::move(behavior_id), rng_seed,
                       std::string(to_string(mode))};
    data.transitions.reserve(n);

    if (mode == DatasetMode::iid_occupancy) {
        const OccupancyMeasure eta = occupancy(mdp, behavior, 1e-12);
        const CumulativeSampler sampler(eta.eta.values());
        Rng rng(rng_seed);
        std::vector<double> scratch;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t idx = sampler.draw(rng);
            const StateId s = idx / mdp.num_actions();
            const ActionId a = idx % mdp.num_actions();
            const auto [r, next] = sample_outcome(mdp, s, a, rng, scratch);
            data.transitions.push_back({s, a, r, next});
        }
        return data;
    }

    for (std::uint64_t episode = 0; data.transitions.size() < n; ++episode) {
        const auto steps = sample_episode(mdp, behavior, max_episode_steps, derive_seed(rng_seed, {episode}));
        if (steps.empty() && episode > 1000 && data.transitions.empty()) {
            throw ConfigError("trajectory_pool: behavior episodes produce no transitions");
        }
        for (const auto& t : steps) {
            if (data.transitions.size() == n) break;
            data.transitions.push_back(t);
        }
    }
    return data;
}

DensityEstimate estimate_density(const Dataset& dataset, std::size_t num_states, std::size_t num_actions) {
    if (dataset.transitions.empty()) throw ConfigError("estimate_density: empty dataset");
    DensityEstimate d;
    d.n = dataset.n();
    d.counts.assign(num_states * num_actions, 0);
    d.state_counts.assign(num_states, 0);
    for (const auto& t : dataset.transitions) {
        if (t.s >= num_states || t.a >= num_actions) throw ConfigError("estimate_density: transition out of range");
        ++d.counts[t.s * num_actions + t.a];
        ++d.state_counts[t.s];
    }
    d.joint = Table(num_states, num_actions, 0.0);
    d.conditional = Table(num_states, num_actions, 1.0 / static_cast<double>(num_actions));
    const double n = static_cast<double>(d.n);
    for (StateId s = 0; s < num_states; ++s) {
        for (ActionId a = 0; a < num_actions; ++a) {
            const auto c = static_cast<double>(d.counts[s * num_actions + a]);
            d.joint(s, a) = c / n;
            if (d.state_counts[s] > 0) d.conditional(s, a) = c / static_cast<double>(d.state_counts[s]);
        }
    }
    return d;
}

DensityEstimate estimate_density(const Dataset& dataset) {
    return estimate_density(dataset, dataset.num_states, dataset.num_actions);
}

SupportFilter::SupportFilter(std::size_t num_states, std::size_t num_actions, double b,
                             std::vector<std::uint8_t> indicator)
    : num_states_(num_states), num_actions_(num_actions), b_(b), indicator_(std::move(indicator)) {
    if (indicator_.size() != num_states * num_actions) throw ConfigError("support filter has the wrong size");
}

SupportFilter SupportFilter::all_ones(std::size_t num_states, std::size_t num_actions) {
    return {num_states, num_actions, 0.0, std::vector<std::uint8_t>(num_states * num_actions, 1)};
}

SupportFilter SupportFilter::all_zeros(std::size_t num_states, std::size_t num_actions) {
    return {num_states, num_actions, 1.0, std::vector<std::uint8_t>(num_states * num_actions, 0)};
}

bool SupportFilter::any_supported(StateId s) const noexcept {
    for (ActionId a = 0; a < num_actions_; ++a)
        if ((*this)(s, a)) return true;
    return false;
}

std::size_t SupportFilter::support_size() const noexcept {
    return static_cast<std::size_t>(std::count(indicator_.begin(), indicator_.end(), std::uint8_t{1}));
}

SupportFilter build_filter(const DensityEstimate& density, double b) {
    if (!(b >= 0.0)) throw ConfigError("support threshold b must be non-negative");
    std::vector<std::uint8_t> indicator(density.joint.size());
    for (std::size_t i = 0; i < indicator.size(); ++i) indicator[i] = density.joint.values()[i] >= b ? 1 : 0;
    return {density.num_states(), density.num_actions(), b, std::move(indicator)};
}

FilterDiagnostics filter_diagnostics(const SupportFilter& filter, const Dataset& dataset, const Policy& pi) {
    if (!pi.is_deterministic()) throw ConfigError("filter_diagnostics needs a deterministic policy");
    FilterDiagnostics out;
    out.support_size = filter.support_size();
    if (dataset.transitions.empty()) return out;
    std::size_t policy_hits = 0, data_hits = 0;
    for (const auto& t : dataset.transitions) {
        policy_hits += filter(t.s, pi.actions()[t.s]) ? 1 : 0;
        data_hits += filter(t.s, t.a) ? 1 : 0;
    }
    const auto n = static_cast<double>(dataset.n());
    out.policy_support_rate = static_cast<double>(policy_hits) / n;
    out.data_in_support = static_cast<double>(data_hits) / n;
    return out;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    out << "# mbsrl-dataset 1\n";
    out << "# mdp_id=" << dataset.provenance.mdp_id << " behavior_id=" << dataset.provenance.behavior_id
        << " seed=" << dataset.provenance.seed << " mode=" << dataset.provenance.mode
        << " states=" << dataset.num_states << " actions=" << dataset.num_actions << " n=" << dataset.n() << "\n";
    out << std::setprecision(17);
    for (const auto& t : dataset.transitions) out << t.s << ' ' << t.a << ' ' << t.r << ' ' << t.s_next << "\n";
}

Dataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        return true;
    };
    if (!next_line() || line.rfind("# mbsrl-dataset 1", 0) != 0) throw ParseError("missing dataset header", 1);
    if (!next_line() || line.rfind("# ", 0) != 0) throw ParseError("missing provenance line", line_no);

    Dataset data;
    std::map<std::string, std::string> kv;
    std::istringstream header(line.substr(2));
    std::string token;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw ParseError("malformed provenance field '" + token + "'", line_no);
        kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    for (const char* key : {"mdp_id", "behavior_id", "seed", "mode", "states", "actions", "n"}) {
        if (!kv.count(key)) throw ParseError(std::string("provenance is missing '") + key + "'", line_no);
    }
    std::size_t n = 0;
    try {
        data.provenance = {kv["mdp_id"], kv["behavior_id"], std::stoull(kv["seed"]), kv["mode"]};
        data.num_states = std::stoull(kv["states"]);
        data.num_actions = std::stoull(kv["actions"]);
        n = std::stoull(kv["n"]);
    } catch (const std::logic_error&) {
        throw ParseError("non-numeric provenance field", line_no);
    }

    data.transitions.reserve(n);
    while (next_line()) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        Transition t{};
        std::string extra;
        if (!(fields >> t.s >> t.a >> t.r >> t.s_next) || (fields >> extra)) {
            throw ParseError("expected 's a r s_next'", line_no);
        }
        if (t.s >= data.num_states || t.s_next >= data.num_states || t.a >= data.num_actions) {
            throw ParseError("transition index out of range", line_no);
        }
        data.transitions.push_back(t);
    }
    if (data.transitions.size() != n) throw ParseError("transition count does not match header n", line_no);
    return data;
}

void write_density_csv(std::ostream& out, const DensityEstimate& density) {
    out << "s,a,count,joint,conditional\n" << std::setprecision(17);
    for (StateId s = 0; s < density.num_states(); ++s)
        for (ActionId a = 0; a < density.num_actions(); ++a)
            out << s << ',' << a << ',' << density.count(s, a) << ',' << density.joint(s, a) << ','
                << density.conditional(s, a) << "\n";
}

void write_filter_csv(std::ostream& out, const SupportFilter& filter) {
    out << "s,a,zeta\n";
    for (StateId s = 0; s < filter.num_states(); ++s)
        for (ActionId a = 0; a < filter.num_actions(); ++a) out << s << ',' << a << ',' << (filter(s, a) ? 1 : 0) << "\n";
}

}  // namespace mbs
