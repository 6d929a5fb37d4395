#include "mbs/spec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mbs {

namespace {

const std::vector<std::string> kAlgorithms = {"mbs_qi", "mbs_pi", "fqi", "api", "bcql", "spibb", "bc"};
const std::vector<std::string> kEnvironments = {"rare_transition", "combination_lock"};

using Kinds = std::set<ExperimentKind>;
constexpr auto SR = ExperimentKind::success_rate;
constexpr auto CP = ExperimentKind::cartpole;
constexpr auto SI = ExperimentKind::safe_improve;
constexpr auto VT = ExperimentKind::verify_theory;

// Key order here is the serialization order.
const std::vector<std::pair<std::string, Kinds>> kKeys = {
    {"environment", {SR}},
    {"algorithms", {SR, CP}},
    {"dataset_mode", {SR}},
    {"n", {SR, CP, SI}},
    {"repeats", {SR, CP}},
    {"epsilon", {CP}},
    {"b", {SR, CP}},
    {"spibb_b", {SR, CP}},
    {"bcql_tau", {SR, CP}},
    {"q_iterations", {SR, CP}},
    {"pi_outer", {SR, SI}},
    {"pi_inner", {SR, SI}},
    {"success_tol", {SR, CP}},
    {"sampling_episodes", {CP}},
    {"eval_episodes", {CP}},
    {"eval_every", {CP}},
    {"calibration_floor", {CP}},
    {"cartpole_ranges", {CP}},
    {"gamma", {CP, SI}},
    {"instances", {SI, VT}},
    {"num_states", {SI}},
    {"max_states", {VT}},
    {"num_actions", {SI, VT}},
    {"b_fraction", {SI}},
    {"improve_tol", {SI}},
    {"operator_cases", {VT}},
    {"reduction_datasets", {VT}},
    {"seed", {SR, CP, SI, VT}},
    {"output", {SR, CP, SI, VT}},
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

double parse_real(const std::string& text) {
    double x = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(x)) {
        throw SpecError("expected a real number, got '" + text + "'");
    }
    return x;
}

std::uint64_t parse_count(const std::string& text) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw SpecError("expected a non-negative integer, got '" + text + "'");
    }
    return x;
}

template <class T, class F>
std::vector<T> parse_list(const std::string& value, F parse_one) {
    std::vector<T> out;
    for (const auto& item : split_list(value)) out.push_back(parse_one(item));
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F format_one) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += format_one(items[i]);
    }
    return out;
}

std::string format_count(std::size_t x) { return std::to_string(x); }

void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "environment") spec.environment = value;
    else if (key == "algorithms") spec.algorithms = split_list(value);
    else if (key == "dataset_mode") spec.dataset_mode = value;
    else if (key == "n") spec.n = parse_list<std::size_t>(value, parse_count);
    else if (key == "repeats") spec.repeats = parse_count(value);
    else if (key == "epsilon") spec.epsilon = parse_list<double>(value, parse_real);
    else if (key == "b") spec.b = parse_list<Threshold>(value, Threshold::parse);
    else if (key == "spibb_b") spec.spibb_b = parse_list<Threshold>(value, Threshold::parse);
    else if (key == "bcql_tau") spec.bcql_tau = parse_list<double>(value, parse_real);
    else if (key == "q_iterations") spec.q_iterations = parse_count(value);
    else if (key == "pi_outer") spec.pi_outer = parse_count(value);
    else if (key == "pi_inner") spec.pi_inner = parse_count(value);
    else if (key == "success_tol") spec.success_tol = parse_real(value);
    else if (key == "sampling_episodes") spec.sampling_episodes = parse_count(value);
    else if (key == "eval_episodes") spec.eval_episodes = parse_count(value);
    else if (key == "eval_every") spec.eval_every = parse_count(value);
    else if (key == "calibration_floor") spec.calibration_floor = parse_real(value);
    else if (key == "cartpole_ranges") spec.cartpole_ranges = parse_list<double>(value, parse_real);
    else if (key == "gamma") spec.gamma = parse_real(value);
    else if (key == "instances") spec.instances = parse_count(value);
    else if (key == "num_states") spec.num_states = parse_count(value);
    else if (key == "max_states") spec.max_states = parse_count(value);
    else if (key == "num_actions") spec.num_actions = parse_count(value);
    else if (key == "b_fraction") spec.b_fraction = parse_real(value);
    else if (key == "improve_tol") spec.improve_tol = parse_real(value);
    else if (key == "operator_cases") spec.operator_cases = parse_count(value);
    else if (key == "reduction_datasets") spec.reduction_datasets = parse_count(value);
    else if (key == "seed") spec.seed = parse_count(value);
    else if (key == "output") spec.output = value;
}

std::string value_of(const ExperimentSpec& spec, const std::string& key) {
    const auto thresholds = [](const std::vector<Threshold>& t) {
        return join(t, [](const Threshold& x) { return x.to_string(); });
    };
    if (key == "environment") return spec.environment;
    if (key == "algorithms") return join(spec.algorithms, [](const std::string& s) { return s; });
    if (key == "dataset_mode") return spec.dataset_mode;
    if (key == "n") return join(spec.n, format_count);
    if (key == "repeats") return format_count(spec.repeats);
    if (key == "epsilon") return join(spec.epsilon, format_real);
    if (key == "b") return thresholds(spec.b);
    if (key == "spibb_b") return thresholds(spec.spibb_b);
    if (key == "bcql_tau") return join(spec.bcql_tau, format_real);
    if (key == "q_iterations") return format_count(spec.q_iterations);
    if (key == "pi_outer") return format_count(spec.pi_outer);
    if (key == "pi_inner") return format_count(spec.pi_inner);
    if (key == "success_tol") return format_real(spec.success_tol);
    if (key == "sampling_episodes") return format_count(spec.sampling_episodes);
    if (key == "eval_episodes") return format_count(spec.eval_episodes);
    if (key == "eval_every") return format_count(spec.eval_every);
    if (key == "calibration_floor") return format_real(spec.calibration_floor);
    if (key == "cartpole_ranges") return join(spec.cartpole_ranges, format_real);
    if (key == "gamma") return format_real(spec.gamma);
    if (key == "instances") return format_count(spec.instances);
    if (key == "num_states") return format_count(spec.num_states);
    if (key == "max_states") return format_count(spec.max_states);
    if (key == "num_actions") return format_count(spec.num_actions);
    if (key == "b_fraction") return format_real(spec.b_fraction);
    if (key == "improve_tol") return format_real(spec.improve_tol);
    if (key == "operator_cases") return format_count(spec.operator_cases);
    if (key == "reduction_datasets") return format_count(spec.reduction_datasets);
    if (key == "seed") return std::to_string(spec.seed);
    if (key == "output") return spec.output;
    return "";
}

const Kinds* applicable_kinds(const std::string& key) {
    for (const auto& [k, kinds] : kKeys)
        if (k == key) return &kinds;
    return nullptr;
}

}  // namespace

std::string format_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::success_rate: return "success_rate";
        case ExperimentKind::cartpole: return "cartpole";
        case ExperimentKind::safe_improve: return "safe_improve";
        case ExperimentKind::verify_theory: return "verify_theory";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& text) {
    for (auto kind : {SR, CP, SI, VT})
        if (to_string(kind) == text) return kind;
    throw SpecError("unknown experiment '" + text + "'");
}

std::string Threshold::to_string() const { return per_n ? format_real(value) + "/n" : format_real(value); }

Threshold Threshold::parse(const std::string& text) {
    const std::string t = trim(text);
    if (t.size() > 2 && t.compare(t.size() - 2, 2, "/n") == 0) return {parse_real(trim(t.substr(0, t.size() - 2))), true};
    return {parse_real(t), false};
}

std::vector<std::size_t> default_sample_grid() {
    std::vector<std::size_t> out;
    for (int i = 4; i <= 10; ++i) out.push_back(static_cast<std::size_t>(std::llround(std::pow(10.0, i / 2.0))));
    return out;
}

ExperimentSpec default_spec(ExperimentKind kind) {
    ExperimentSpec s;
    s.experiment = kind;
    switch (kind) {
        case ExperimentKind::success_rate:
            s.algorithms = {"mbs_qi", "mbs_pi", "fqi", "api", "bcql", "spibb"};
            s.n = default_sample_grid();
            s.repeats = 100;
            s.b = {{10.0, true}};
            s.spibb_b = {{10.0, true}};
            s.bcql_tau = {0.0, 0.1};
            s.success_tol = 1e-6;
            break;
        case ExperimentKind::cartpole:
            s.algorithms = {"mbs_qi", "fqi", "bcql", "spibb", "bc"};
            s.n = {10000};
            s.repeats = 10;
            s.epsilon = {0.3, 0.6};
            s.b = {{0.005, false}, {0.001, false}, {0.0001, false}};
            s.spibb_b = s.b;
            s.bcql_tau = {0.0, 0.1};
            s.success_tol = 10.0;
            s.cartpole_ranges = {2.4, 2.0, 0.21, 2.5};
            s.gamma = 0.99;
            break;
        case ExperimentKind::safe_improve:
            s.n = {100000};
            s.instances = 100;
            s.num_states = 10;
            s.num_actions = 3;
            s.gamma = 0.9;
            break;
        case ExperimentKind::verify_theory:
            s.instances = 200;
            break;
    }
    return s;
}

void validate(const ExperimentSpec& spec) {
    const auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw SpecError(msg);
    };
    const auto kind = spec.experiment;
    if (kind == SR) {
        need(std::find(kEnvironments.begin(), kEnvironments.end(), spec.environment) != kEnvironments.end(),
             "unknown environment '" + spec.environment + "'");
        need(spec.dataset_mode == "trajectory_pool" || spec.dataset_mode == "iid_occupancy",
             "unknown dataset_mode '" + spec.dataset_mode + "'");
    }
    if (kind == SR || kind == CP) {
        need(!spec.algorithms.empty(), "algorithms must not be empty");
        for (const auto& a : spec.algorithms)
            need(std::find(kAlgorithms.begin(), kAlgorithms.end(), a) != kAlgorithms.end(), "unknown algorithm '" + a + "'");
        need(spec.repeats >= 1, "repeats must be at least 1");
        need(!spec.b.empty(), "b must not be empty");
        need(!spec.spibb_b.empty(), "spibb_b must not be empty");
        need(!spec.bcql_tau.empty(), "bcql_tau must not be empty");
        for (const auto& t : spec.b) need(t.value >= 0.0, "b must be non-negative");
        for (const auto& t : spec.spibb_b) need(t.value >= 0.0, "spibb_b must be non-negative");
        for (double t : spec.bcql_tau) need(t >= 0.0, "bcql_tau must be non-negative");
        need(spec.q_iterations >= 1, "q_iterations must be at least 1");
        need(spec.success_tol >= 0.0, "success_tol must be non-negative");
    }
    if (kind == SR || kind == SI) need(spec.pi_outer >= 1 && spec.pi_inner >= 1, "pi_outer and pi_inner must be at least 1");
    if (kind != VT) {
        need(!spec.n.empty(), "n must not be empty");
        for (auto n : spec.n) need(n >= 1, "every n must be at least 1");
    }
    if (kind == CP) {
        need(!spec.epsilon.empty(), "epsilon must not be empty");
        for (double e : spec.epsilon) need(e >= 0.0 && e <= 1.0, "epsilon must lie in [0, 1]");
        need(spec.cartpole_ranges.size() == 4, "cartpole_ranges needs 4 half-widths");
        for (double r : spec.cartpole_ranges) need(r > 0.0, "cartpole_ranges must be positive");
        need(spec.sampling_episodes >= 1 && spec.eval_episodes >= 1 && spec.eval_every >= 1,
             "sampling_episodes, eval_episodes and eval_every must be at least 1");
    }
    if (kind == CP || kind == SI) need(spec.gamma >= 0.0 && spec.gamma < 1.0, "gamma must lie in [0, 1)");
    if (kind == SI) {
        need(spec.instances >= 1, "instances must be at least 1");
        need(spec.num_states >= 2 && spec.num_actions >= 1, "num_states must be >= 2 and num_actions >= 1");
        need(spec.b_fraction >= 0.0, "b_fraction must be non-negative");
    }
    if (kind == VT) {
        need(spec.instances >= 1, "instances must be at least 1");
        need(spec.max_states >= 2 && spec.num_actions >= 1, "max_states must be >= 2 and num_actions >= 1");
    }
}

ExperimentSpec parse_spec(std::istream& in) {
    struct Entry {
        std::string key, value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", line_no);
        if (key != "experiment" && !applicable_kinds(key)) throw ParseError("unknown key '" + key + "'", line_no);
        if (seen.count(key)) throw ParseError("duplicate key '" + key + "'", line_no);
        seen[key] = line_no;
        entries.push_back({key, trim(line.substr(eq + 1)), line_no});
    }

    const auto it = std::find_if(entries.begin(), entries.end(), [](const Entry& e) { return e.key == "experiment"; });
    if (it == entries.end()) throw SpecError("missing required key 'experiment'");
    ExperimentKind kind;
    try {
        kind = parse_experiment_kind(it->value);
    } catch (const SpecError& e) {
        throw ParseError(e.what(), it->line);
    }

    ExperimentSpec spec = default_spec(kind);
    for (const auto& e : entries) {
        if (e.key == "experiment") continue;
        if (!applicable_kinds(e.key)->count(kind)) {
            throw ParseError("key '" + e.key + "' does not apply to experiment '" + to_string(kind) + "'", e.line);
        }
        try {
            apply_key(spec, e.key, e.value);
        } catch (const SpecError& err) {
            throw ParseError(std::string(e.key) + ": " + err.what(), e.line);
        }
    }
    validate(spec);
    return spec;
}

ExperimentSpec parse_spec_text(const std::string& text) {
    std::istringstream in(text);
    return parse_spec(in);
}

ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file '" + path + "'");
    return parse_spec(in);
}

void write_spec(std::ostream& out, const ExperimentSpec& spec, const std::string& line_prefix) {
    out << line_prefix << "experiment = " << to_string(spec.experiment) << "\n";
    for (const auto& [key, kinds] : kKeys) {
        if (!kinds.count(spec.experiment)) continue;
        if (key == "output" && spec.output.empty()) continue;
        out << line_prefix << key << " = " << value_of(spec, key) << "\n";
    }
}

std::string serialize(const ExperimentSpec& spec) {
    std::ostringstream out;
    write_spec(out, spec);
    return out.str();
}

std::string output_name(const ExperimentSpec& spec) {
    if (!spec.output.empty()) return spec.output;
    if (spec.experiment == SR) return "success_rate_" + spec.environment + ".csv";
    return to_string(spec.experiment) + ".csv";
}

}  // namespace mbs
