#include "switchflow/dp_oracle.hpp"

#include "switchflow/errors.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <sstream>

namespace switchflow {

namespace {

double expected_next(const MarkovChainLattice& lattice, std::size_t k, std::size_t node,
                     const std::vector<double>& next) {
    double e = 0.0;
    for (const auto& tr : lattice.row(k, node)) e += tr.prob * next[tr.to];
    return e;
}

} // namespace

NodeValues snell_value(const MarkovChainLattice& lattice, const NodeValues& reward) {
    const auto n = lattice.steps();
    if (reward.size() != n + 1) throw InvalidInput("reward must have one level per time index");
    for (std::size_t k = 0; k <= n; ++k) {
        if (reward[k].size() != lattice.node_count(k)) {
            throw InvalidInput("reward level " + std::to_string(k) + " has " +
                               std::to_string(reward[k].size()) + " values, lattice has " +
                               std::to_string(lattice.node_count(k)) + " nodes");
        }
    }
    NodeValues envelope(n + 1);
    envelope[n] = reward[n];
    for (std::size_t k = n; k-- > 0;) {
        envelope[k].resize(lattice.node_count(k));
        for (std::size_t node = 0; node < lattice.node_count(k); ++node) {
            envelope[k][node] =
                std::max(reward[k][node], expected_next(lattice, k, node, envelope[k + 1]));
        }
    }
    return envelope;
}

LatticeValues switching_value_dp(const MarkovChainLattice& lattice, const SwitchingProblem& p) {
    double lo = lattice.min_state();
    double hi = lattice.max_state();
    if (!(lo < hi)) {
        lo -= 1.0;
        hi += 1.0;
    }
    require_valid(validate_problem(p, lo, hi));

    const auto m = p.mode_count();
    const auto n = lattice.steps();
    const double dt = lattice.grid().dt();
    LatticeValues out;
    out.values.assign(m, NodeValues(n + 1));
    for (std::size_t i = 0; i < m; ++i) out.values[i][n].assign(lattice.node_count(n), 0.0);

    std::vector<double> cont(m);
    for (std::size_t k = n; k-- > 0;) {
        const double t = lattice.grid().time(k);
        const auto states = lattice.states(k);
        for (std::size_t i = 0; i < m; ++i) out.values[i][k].resize(states.size());
        for (std::size_t node = 0; node < states.size(); ++node) {
            const double x = states[node];
            for (std::size_t i = 0; i < m; ++i) {
                cont[i] = p.payoff(i)(t, x) * dt +
                          expected_next(lattice, k, node, out.values[i][k + 1]);
            }
            for (std::size_t i = 0; i < m; ++i) {
                double best = cont[i];
                for (std::size_t j = 0; j < m; ++j) {
                    if (j != i) best = std::max(best, cont[j] - p.cost(i, j)(t, x));
                }
                out.values[i][k][node] = best;
            }
        }
    }
    return out;
}

void write_lattice_values_csv(std::ostream& out, const MarkovChainLattice& lattice,
                              const LatticeValues& values) {
    const auto old_precision = out.precision(17);
    out << "mode,t,x,value\n";
    for (std::size_t i = 0; i < values.values.size(); ++i) {
        for (std::size_t k = 0; k <= lattice.steps(); ++k) {
            const auto states = lattice.states(k);
            for (std::size_t node = 0; node < states.size(); ++node) {
                out << i + 1 << ',' << lattice.grid().time(k) << ',' << states[node] << ','
                    << values.values[i][k][node] << '\n';
            }
        }
    }
    out.precision(old_precision);
}

std::string StrategyDescription::to_string(const TimeGrid& grid) const {
    if (switches.empty()) return "never switch";
    std::ostringstream os;
    os.precision(12);
    for (std::size_t s = 0; s < switches.size(); ++s) {
        const auto& d = switches[s];
        if (s > 0) os << "; ";
        os << "switch " << d.from + 1 << "->" << d.to + 1 << " at t=" << grid.time(d.time_index);
        if (d.time_index > 0) {
            os << " on history [";
            for (std::size_t h = 0; h < d.history.size(); ++h) os << (h ? "," : "") << d.history[h];
            os << ']';
        }
    }
    if (truncated) os << "; ...";
    return os.str();
}

namespace {

class StrategySearch {
public:
    StrategySearch(const MarkovChainLattice& lattice, const SwitchingProblem& p)
        : lattice_(lattice), p_(p), dt_(lattice.grid().dt()) {}

    // Best expected profit from history node (k, node) in `mode` with `budget` switches left.
    // When `record` is set, appends the switches of the best strategy below this node.
    double best(std::size_t k, std::size_t node, std::size_t mode, std::size_t budget,
                std::vector<std::size_t>& history, StrategyDescription* record) {
        if (k == lattice_.steps()) return 0.0;
        const double t = lattice_.grid().time(k);
        const double x = lattice_.states(k)[node];

        double best_value = -std::numeric_limits<double>::infinity();
        std::size_t best_target = mode;
        for (std::size_t target = 0; target < p_.mode_count(); ++target) {
            if (target != mode && budget == 0) continue;
            const double cost = target == mode ? 0.0 : p_.cost(mode, target)(t, x);
            const std::size_t left = target == mode ? budget : budget - 1;
            const double v = -cost + (p_.payoff(target)(t, x) * dt_ +
                                      continuation(k, node, target, left, history, nullptr));
            if (v > best_value) {
                best_value = v;
                best_target = target;
            }
        }
        if (record) {
            if (best_target != mode) {
                if (record->switches.size() < kMaxRecordedDecisions) {
                    record->switches.push_back({k, history, mode, best_target});
                } else {
                    record->truncated = true;
                }
            }
            const std::size_t left = best_target == mode ? budget : budget - 1;
            continuation(k, node, best_target, left, history, record);
        }
        return best_value;
    }

private:
    double continuation(std::size_t k, std::size_t node, std::size_t mode, std::size_t budget,
                        std::vector<std::size_t>& history, StrategyDescription* record) {
        double e = 0.0;
        for (const auto& tr : lattice_.row(k, node)) {
            history.push_back(tr.to);
            e += tr.prob * best(k + 1, tr.to, mode, budget, history, record);
            history.pop_back();
        }
        return e;
    }

    const MarkovChainLattice& lattice_;
    const SwitchingProblem& p_;
    double dt_;
};

double history_count(const MarkovChainLattice& lattice) {
    std::vector<double> paths_to(lattice.node_count(0), 1.0);
    double total = static_cast<double>(paths_to.size());
    for (std::size_t k = 0; k < lattice.steps(); ++k) {
        std::vector<double> next(lattice.node_count(k + 1), 0.0);
        for (std::size_t node = 0; node < paths_to.size(); ++node) {
            for (const auto& tr : lattice.row(k, node)) next[tr.to] += paths_to[node];
        }
        for (double c : next) total += c;
        paths_to = std::move(next);
    }
    return total;
}

} // namespace

EnumerationResult enumerate_strategies(const MarkovChainLattice& lattice, const SwitchingProblem& p,
                                       std::size_t start_mode, std::size_t max_switches) {
    if (start_mode >= p.mode_count()) throw InvalidInput("start mode out of range");
    if (lattice.node_count(0) != 1) throw InvalidInput("enumeration needs a single root node");
    const double size = history_count(lattice) * static_cast<double>(p.mode_count()) *
                        (static_cast<double>(max_switches) + 1.0);
    if (size > kMaxStrategyNodes) {
        std::ostringstream os;
        os << "strategy tree has about " << size << " nodes, above the limit of "
           << kMaxStrategyNodes;
        throw InvalidInput(os.str());
    }

    StrategySearch search(lattice, p);
    std::vector<std::size_t> history{0};
    EnumerationResult result{};
    result.best_value = search.best(0, 0, start_mode, max_switches, history, nullptr);
    // Re-walk the optimal branch to describe it; values are recomputed identically.
    search.best(0, 0, start_mode, max_switches, history, &result.best_strategy);
    return result;
}

} // namespace switchflow
