#include "mbs/mdp_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mbs {

void write_mdp(std::ostream& out, const TabularMdp& mdp) {
    out << std::setprecision(17);
    out << "mbsrl-mdp 1\n";
    if (!mdp.name().empty()) out << "name " << mdp.name() << "\n";
    out << "states " << mdp.num_states() << "\n";
    out << "actions " << mdp.num_actions() << "\n";
    out << "gamma " << mdp.gamma() << "\n";
    out << "r_max " << mdp.r_max() << "\n";
    out << "initial";
    for (double p : mdp.initial_dist()) out << ' ' << p;
    out << "\n";
    std::size_t terminals = 0;
    for (StateId s = 0; s < mdp.num_states(); ++s) terminals += mdp.is_terminal(s) ? 1 : 0;
    out << "terminal " << terminals;
    for (StateId s = 0; s < mdp.num_states(); ++s)
        if (mdp.is_terminal(s)) out << ' ' << s;
    out << "\n";
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const auto row = mdp.successors(s, a);
            out << "transition " << s << ' ' << a << ' ' << row.size();
            for (const auto& o : row) out << ' ' << o.state << ' ' << o.prob;
            out << "\n";
        }
    }
    for (StateId s = 0; s < mdp.num_states(); ++s) {
        for (ActionId a = 0; a < mdp.num_actions(); ++a) {
            const auto atoms = mdp.reward_dist(s, a);
            out << "reward " << s << ' ' << a << ' ' << atoms.size();
            for (const auto& atom : atoms) out << ' ' << atom.value << ' ' << atom.prob;
            out << "\n";
        }
    }
    out << "end\n";
}

namespace {

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    // Next non-empty, non-comment line split into a stream; false at EOF.
    bool next(std::istringstream& fields, std::string& keyword) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            fields.clear();
            fields.str(line);
            fields >> keyword;
            return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

template <class T>
T field(std::istringstream& fields, const LineReader& reader, const char* what) {
    T value{};
    if (!(fields >> value)) throw ParseError(std::string("expected ") + what, reader.line());
    return value;
}

void expect_end_of_line(std::istringstream& fields, const LineReader& reader) {
    std::string extra;
    if (fields >> extra) throw ParseError("unexpected trailing field '" + extra + "'", reader.line());
}

}  // namespace

TabularMdp read_mdp(std::istream& in) {
    LineReader reader(in);
    std::istringstream fields;
    std::string keyword;

    if (!reader.next(fields, keyword) || keyword != "mbsrl-mdp") throw ParseError("missing 'mbsrl-mdp' header", 1);
    if (field<int>(fields, reader, "format version") != 1) throw ParseError("unsupported format version", reader.line());

    std::string name;
    std::size_t states = 0, actions = 0;
    double gamma = -1.0, r_max = -1.0;
    bool have_states = false, have_actions = false, have_gamma = false;
    std::vector<double> initial;
    std::vector<StateId> terminals;
    struct Row {
        StateId s;
        ActionId a;
        std::vector<Outcome> outcomes;
        std::vector<RewardAtom> atoms;
    };
    std::vector<Row> transitions, rewards;
    bool ended = false;

    while (reader.next(fields, keyword)) {
        if (keyword == "name") {
            name = field<std::string>(fields, reader, "name");
        } else if (keyword == "states") {
            states = field<std::size_t>(fields, reader, "state count");
            have_states = true;
        } else if (keyword == "actions") {
            actions = field<std::size_t>(fields, reader, "action count");
            have_actions = true;
        } else if (keyword == "gamma") {
            gamma = field<double>(fields, reader, "gamma");
            have_gamma = true;
        } else if (keyword == "r_max") {
            r_max = field<double>(fields, reader, "r_max");
        } else if (keyword == "initial") {
            if (!have_states) throw ParseError("'initial' before 'states'", reader.line());
            initial.resize(states);
            for (auto& p : initial) p = field<double>(fields, reader, "initial probability");
        } else if (keyword == "terminal") {
            const auto k = field<std::size_t>(fields, reader, "terminal count");
            for (std::size_t i = 0; i < k; ++i) terminals.push_back(field<StateId>(fields, reader, "terminal state"));
        } else if (keyword == "transition") {
            Row row{field<StateId>(fields, reader, "state"), field<ActionId>(fields, reader, "action"), {}, {}};
            const auto k = field<std::size_t>(fields, reader, "entry count");
            for (std::size_t i = 0; i < k; ++i) {
                const auto next = field<StateId>(fields, reader, "next state");
                const auto p = field<double>(fields, reader, "probability");
                row.outcomes.push_back({next, p});
            }
            transitions.push_back(std::move(row));
        } else if (keyword == "reward") {
            Row row{field<StateId>(fields, reader, "state"), field<ActionId>(fields, reader, "action"), {}, {}};
            const auto k = field<std::size_t>(fields, reader, "atom count");
            for (std::size_t i = 0; i < k; ++i) {
                const auto v = field<double>(fields, reader, "reward value");
                const auto q = field<double>(fields, reader, "reward probability");
                row.atoms.push_back({v, q});
            }
            rewards.push_back(std::move(row));
        } else if (keyword == "end") {
            ended = true;
            break;
        } else {
            throw ParseError("unknown keyword '" + keyword + "'", reader.line());
        }
        expect_end_of_line(fields, reader);
    }
    if (!ended) throw ParseError("missing 'end'", reader.line());
    if (!have_states || !have_actions || !have_gamma) throw ParseError("missing states/actions/gamma", reader.line());

    try {
        MdpBuilder builder(states, actions, gamma);
        builder.name(name).initial(initial);
        if (r_max >= 0.0) builder.r_max(r_max);
        for (StateId s : terminals) builder.terminal(s);
        for (auto& row : transitions) builder.transition(row.s, row.a, std::move(row.outcomes));
        for (auto& row : rewards) builder.reward(row.s, row.a, std::move(row.atoms));
        return builder.build();
    } catch (const ConfigError& e) {
        throw ParseError(std::string("invalid MDP: ") + e.what(), 0);
    } catch (const std::out_of_range&) {
        throw ParseError("index out of range", 0);
    }
}

void save_mdp(const std::string& path, const TabularMdp& mdp) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    write_mdp(out, mdp);
}

TabularMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_mdp(in);
}

}  // namespace mbs
