#include "switchflow/config.hpp"

#include "switchflow/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace switchflow {

ConfigError::ConfigError(const std::string& source, std::size_t line, const std::string& message)
    : InvalidInput(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
      source_(source), line_(line) {}

SwitchingProblem ProblemSpec::build() const {
    std::vector<CoefficientFunction> psi;
    for (const auto& c : payoffs) psi.emplace_back(c);
    std::vector<std::vector<CoefficientFunction>> g(modes);
    for (std::size_t i = 0; i < modes; ++i)
        for (const auto& c : costs.at(i)) g[i].emplace_back(c);
    return {std::move(psi), std::move(g), CoefficientFunction(drift),
            CoefficientFunction(volatility), horizon, loop_floor};
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

// Term-by-term parser for sums like "0.1|x| + 0.5*t - 2".
class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : text_(text) {}

    AffineCoefficients parse() {
        AffineCoefficients c;
        skip_space();
        if (at_end()) fail("empty expression");
        bool first = true;
        while (!at_end()) {
            double sign = 1.0;
            if (peek() == '+' || peek() == '-') {
                sign = peek() == '-' ? -1.0 : 1.0;
                ++pos_;
                skip_space();
            } else if (!first) {
                fail("expected '+' or '-'");
            }
            first = false;
            term(sign, c);
            skip_space();
        }
        return c;
    }

private:
    void term(double sign, AffineCoefficients& c) {
        double factor = 1.0;
        bool has_number = false;
        if (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
            factor = number();
            has_number = true;
            skip_space();
            if (!at_end() && peek() == '*') {
                ++pos_;
                skip_space();
                if (at_end()) fail("dangling '*'");
            }
        }
        if (at_end() || peek() == '+' || peek() == '-') {
            if (!has_number) fail("missing term");
            c.const_term += sign * factor;
            return;
        }
        if (peek() == 'x') {
            ++pos_;
            c.x_coef += sign * factor;
        } else if (peek() == 't') {
            ++pos_;
            c.t_coef += sign * factor;
        } else if (text_.substr(pos_, 3) == "|x|") {
            pos_ += 3;
            c.abs_x_coef += sign * factor;
        } else {
            fail(std::string("unexpected '") + peek() + "'");
        }
    }

    double number() {
        const auto start = pos_;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' ||
                             peek() == 'e' || peek() == 'E' ||
                             ((peek() == '-' || peek() == '+') && pos_ > start &&
                              (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
            ++pos_;
        }
        double v;
        if (!parse_double(text_.substr(start, pos_ - start), v)) fail("bad number");
        return v;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidInput("cannot parse coefficient '" + std::string(text_) + "': " + what);
    }
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

bool parse_bool(std::string_view s, bool& out) {
    if (s == "true" || s == "on" || s == "yes" || s == "1") {
        out = true;
        return true;
    }
    if (s == "false" || s == "off" || s == "no" || s == "0") {
        out = false;
        return true;
    }
    return false;
}

bool parse_size(std::string_view s, std::size_t& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

// True for every key in the schema; mode labels are range-checked later.
bool known_key(std::string_view key) {
    static const std::set<std::string, std::less<>> fixed{
        "version",          "problem.modes",      "problem.horizon",    "problem.loop_floor",
        "problem.drift",    "problem.volatility", "grid.time_steps",    "grid.space_nodes",
        "grid.x_min",       "grid.x_max",         "grid.log_space",     "scheme.type",
        "scheme.picard",    "scheme.tol",         "scheme.max_iters",   "simulation.x0",
        "simulation.start_mode", "simulation.paths", "simulation.seed", "simulation.slack",
        "simulation.switch_tolerance", "output.dir", "output.surfaces", "output.executions",
        "output.tail",      "output.paths"};
    if (fixed.count(key)) return true;
    auto labels = [](std::string_view rest, std::size_t count) {
        std::size_t found = 0;
        while (true) {
            const auto dot = rest.find('.');
            const auto part = rest.substr(0, dot);
            if (part.empty() || part.find_first_not_of("0123456789") != std::string_view::npos) return false;
            ++found;
            if (dot == std::string_view::npos) break;
            rest.remove_prefix(dot + 1);
        }
        return found == count;
    };
    constexpr std::string_view payoff = "problem.payoff.";
    constexpr std::string_view cost = "problem.cost.";
    if (key.substr(0, payoff.size()) == payoff) return labels(key.substr(payoff.size()), 1);
    if (key.substr(0, cost.size()) == cost) return labels(key.substr(cost.size()), 2);
    return false;
}

struct Entry {
    std::string value;
    std::size_t line;
};

} // namespace

AffineCoefficients parse_coefficient(std::string_view text) {
    text = trim(text);
    std::istringstream tuple{std::string(text)};
    std::vector<std::string> fields;
    for (std::string f; tuple >> f;) fields.push_back(f);
    if (fields.size() == 4) {
        double v[4];
        bool ok = true;
        for (int n = 0; n < 4; ++n) ok = ok && parse_double(fields[n], v[n]);
        if (ok) return {v[0], v[1], v[2], v[3]};
    }
    return ExpressionParser(text).parse();
}

std::string format_coefficient(const AffineCoefficients& c) {
    std::ostringstream os;
    os.precision(17);
    const std::pair<double, const char*> terms[] = {
        {c.x_coef, "x"}, {c.abs_x_coef, "|x|"}, {c.t_coef, "t"}, {c.const_term, ""}};
    bool first = true;
    for (const auto& [v, name] : terms) {
        if (v == 0.0) continue;
        if (first) {
            if (v < 0.0) os << '-';
        } else {
            os << (v < 0.0 ? " - " : " + ");
        }
        const double a = std::abs(v);
        if (a != 1.0 || *name == '\0') os << a;
        os << name;
        first = false;
    }
    if (first) os << '0';
    return os.str();
}

RunConfig parse_config(std::string_view text, const std::string& source) {
    std::map<std::string, Entry> entries;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        auto line = trim(std::string_view(raw).substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source, line_no, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError(source, line_no, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(source, line_no, "expected key = value");
        auto key = std::string(trim(line.substr(0, eq)));
        const auto value = std::string(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(source, line_no, "missing key");
        if (value.empty()) throw ConfigError(source, line_no, "missing value for '" + key + "'");
        if (!section.empty() && key != "version") key = section + "." + key;
        if (entries.count(key)) {
            throw ConfigError(source, line_no,
                              "duplicate key '" + key + "' (first on line " +
                                  std::to_string(entries[key].line) + ")");
        }
        entries[key] = {value, line_no};
    }

    // Reject misspelt keys before any missing-key error can hide them.
    for (const auto& [key, e] : entries) {
        if (!known_key(key)) throw ConfigError(source, e.line, "unknown key '" + key + "'");
    }

    RunConfig cfg;
    cfg.source = source;
    std::set<std::string> used;

    auto find = [&](const std::string& key) -> const Entry* {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        used.insert(key);
        return &it->second;
    };
    auto bad = [&](const std::string& key, const Entry& e, const std::string& why) {
        return ConfigError(source, e.line, "'" + key + "': " + why);
    };
    auto real = [&](const std::string& key, auto setter) {
        if (const auto* e = find(key)) {
            double v;
            if (!parse_double(e->value, v)) throw bad(key, *e, "expected a real number");
            setter(v);
        }
    };
    auto count = [&](const std::string& key, std::size_t& out) {
        if (const auto* e = find(key)) {
            if (!parse_size(e->value, out)) throw bad(key, *e, "expected a nonnegative integer");
        }
    };
    auto flag = [&](const std::string& key, bool& out) {
        if (const auto* e = find(key)) {
            if (!parse_bool(e->value, out)) throw bad(key, *e, "expected true or false");
        }
    };
    auto coefficient = [&](const std::string& key, bool required) -> std::optional<AffineCoefficients> {
        const auto* e = find(key);
        if (!e) {
            if (required) throw ConfigError(source, 0, "missing required key '" + key + "'");
            return std::nullopt;
        }
        try {
            return parse_coefficient(e->value);
        } catch (const InvalidInput& err) {
            throw bad(key, *e, err.what());
        }
    };

    if (const auto* e = find("version")) {
        std::size_t v;
        if (!parse_size(e->value, v) || v != kConfigVersion) {
            throw bad("version", *e, "unsupported config version (expected 1)");
        }
    }

    auto& prob = cfg.problem;
    if (!find("problem.modes")) throw ConfigError(source, 0, "missing required key 'problem.modes'");
    count("problem.modes", prob.modes);
    if (prob.modes < 2) throw bad("problem.modes", entries["problem.modes"], "need at least 2 modes");
    if (!entries.count("problem.horizon")) {
        throw ConfigError(source, 0, "missing required key 'problem.horizon'");
    }
    real("problem.horizon", [&](double v) { prob.horizon = v; });
    real("problem.loop_floor", [&](double v) { prob.loop_floor = v; });
    prob.drift = *coefficient("problem.drift", true);
    prob.volatility = *coefficient("problem.volatility", true);
    for (std::size_t i = 1; i <= prob.modes; ++i) {
        prob.payoffs.push_back(*coefficient("problem.payoff." + std::to_string(i), true));
    }
    prob.costs.assign(prob.modes, std::vector<AffineCoefficients>(prob.modes));
    for (std::size_t i = 1; i <= prob.modes; ++i) {
        for (std::size_t j = 1; j <= prob.modes; ++j) {
            const auto key = "problem.cost." + std::to_string(i) + "." + std::to_string(j);
            auto c = coefficient(key, i != j);
            if (i == j && c && !(*c == AffineCoefficients{})) {
                throw bad(key, entries[key], "diagonal costs must be zero");
            }
            if (c) prob.costs[i - 1][j - 1] = *c;
        }
    }

    auto& grid = cfg.grid;
    count("grid.time_steps", grid.time_steps);
    count("grid.space_nodes", grid.space_nodes);
    real("grid.x_min", [&](double v) { grid.x_min = v; });
    real("grid.x_max", [&](double v) { grid.x_max = v; });
    if (const auto* e = find("grid.log_space")) {
        bool on;
        if (e->value == "auto") {
            grid.log_space = LogSpaceSetting::automatic;
        } else if (parse_bool(e->value, on)) {
            grid.log_space = on ? LogSpaceSetting::on : LogSpaceSetting::off;
        } else {
            throw bad("grid.log_space", *e, "expected auto, true or false");
        }
    }
    if (grid.x_min.has_value() != grid.x_max.has_value()) {
        throw ConfigError(source, 0, "grid.x_min and grid.x_max must be given together");
    }

    auto& scheme = cfg.scheme;
    if (const auto* e = find("scheme.type")) {
        if (e->value == "implicit") {
            scheme.scheme = Scheme::implicit_euler;
        } else if (e->value == "explicit") {
            scheme.scheme = Scheme::explicit_euler;
        } else {
            throw bad("scheme.type", *e, "expected implicit or explicit");
        }
    }
    flag("scheme.picard", scheme.picard);
    real("scheme.tol", [&](double v) { scheme.tol = v; });
    count("scheme.max_iters", scheme.max_iters);

    auto& sim = cfg.simulation;
    real("simulation.x0", [&](double v) { sim.x0 = v; });
    if (const auto* e = find("simulation.start_mode")) {
        std::size_t label;
        if (!parse_size(e->value, label) || label < 1 || label > prob.modes) {
            throw bad("simulation.start_mode", *e, "expected a mode label in 1..m");
        }
        sim.start_mode = label - 1;
    }
    count("simulation.paths", sim.paths);
    if (const auto* e = find("simulation.seed")) {
        if (!parse_u64(e->value, sim.seed)) throw bad("simulation.seed", *e, "expected an unsigned integer");
    }
    real("simulation.slack", [&](double v) { sim.slack = v; });
    real("simulation.switch_tolerance", [&](double v) { sim.switch_tolerance = v; });

    auto& out = cfg.output;
    if (const auto* e = find("output.dir")) out.dir = e->value;
    flag("output.surfaces", out.surfaces);
    flag("output.executions", out.executions);
    flag("output.tail", out.tail);
    flag("output.paths", out.paths);

    for (const auto& [key, e] : entries) {
        if (!used.count(key)) throw ConfigError(source, e.line, "unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

Grids make_grids(const RunConfig& config, const SwitchingProblem& problem) {
    TimeGrid time = TimeGrid::over(problem, config.grid.time_steps);
    bool log_space = false;
    switch (config.grid.log_space) {
    case LogSpaceSetting::on: log_space = true; break;
    case LogSpaceSetting::off: log_space = false; break;
    case LogSpaceSetting::automatic:
        log_space = problem.has_multiplicative_dynamics() && config.simulation.x0 > 0.0;
        break;
    }
    if (config.grid.x_min) {
        return {time, SpaceGrid(*config.grid.x_min, *config.grid.x_max, config.grid.space_nodes,
                                log_space)};
    }
    return {time, auto_space_grid(problem, config.simulation.x0, config.grid.space_nodes, log_space)};
}

} // namespace switchflow
