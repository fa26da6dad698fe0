#include "switchflow/strategy.hpp"

#include "switchflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace switchflow {

SwitchingPolicy::SwitchingPolicy(std::size_t modes, Grids grids, double switch_tolerance)
    : modes_(modes), grids_(std::move(grids)), switch_tolerance_(switch_tolerance) {
    const auto per_mode = (grids_.time.steps() + 1) * grids_.space.nodes();
    targets_.resize(modes_ * per_mode);
    for (std::size_t i = 0; i < modes_; ++i) {
        std::fill_n(targets_.begin() + static_cast<std::ptrdiff_t>(i * per_mode), per_mode, i);
    }
}

void SwitchingPolicy::set_target(std::size_t mode, std::size_t k, std::size_t j, std::size_t to) {
    if (mode >= modes_ || to >= modes_ || k > grids_.time.steps() || j >= grids_.space.nodes()) {
        throw InvalidInput("policy index out of range");
    }
    if (k == grids_.time.steps() && to != mode) {
        throw InvalidInput("no switch is allowed at the terminal time");
    }
    targets_[index(mode, k, j)] = to;
}

double default_switch_tolerance(const ValueSurface& surface) {
    return 1e-7 * (1.0 + surface.max_norm());
}

SwitchingPolicy extract_policy(const ValueSurface& surface, const SwitchingProblem& p,
                               double switch_tolerance) {
    if (surface.modes() != p.mode_count()) throw InvalidInput("surface and problem disagree on m");
    const auto& grids = surface.grids();
    SwitchingPolicy policy(surface.modes(), grids, switch_tolerance);
    for (std::size_t k = 0; k < grids.time.steps(); ++k) {
        const double t = grids.time.time(k);
        for (std::size_t j = 0; j < grids.space.nodes(); ++j) {
            const double x = grids.space.state(j);
            for (std::size_t i = 0; i < surface.modes(); ++i) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t target = i;
                for (std::size_t l = 0; l < surface.modes(); ++l) {
                    if (l == i) continue;
                    const double v = surface.at(l, k, j) - p.cost(i, l)(t, x);
                    if (v > best) {
                        best = v;
                        target = l;
                    }
                }
                if (surface.at(i, k, j) <= best + switch_tolerance) policy.set_target(i, k, j, target);
            }
        }
    }
    return policy;
}

std::vector<ExecutedStrategy> simulate_strategy(const SwitchingPolicy& policy,
                                                const PathEnsemble& paths,
                                                const SwitchingProblem& p, std::size_t start_mode) {
    if (!(paths.grid() == policy.grids().time)) {
        throw InvalidInput("path time grid does not match the policy time grid");
    }
    if (policy.modes() != p.mode_count()) throw InvalidInput("policy and problem disagree on m");
    if (start_mode >= p.mode_count()) throw InvalidInput("start mode out of range");

    const auto& grid = paths.grid();
    const auto& space = policy.grids().space;
    const double dt = grid.dt();
    std::vector<ExecutedStrategy> out(paths.path_count());
    std::vector<bool> visited(p.mode_count());

    for (std::size_t path = 0; path < paths.path_count(); ++path) {
        auto& exec = out[path];
        std::size_t mode = start_mode;
        double costs = 0.0;
        for (std::size_t k = 0; k < grid.steps(); ++k) {
            const double t = grid.time(k);
            const double x = paths.at(path, k);
            const auto node = space.nearest(x);
            if (policy.switches(mode, k, node)) {
                std::fill(visited.begin(), visited.end(), false);
                visited[mode] = true;
                std::size_t last = mode;
                double chain_cost = 0.0;
                while (policy.switches(last, k, node)) {
                    const auto next = policy.target(last, k, node);
                    if (visited[next]) break;
                    chain_cost += p.cost(last, next)(t, x);
                    visited[next] = true;
                    last = next;
                }
                if (last != mode) {
                    const double cost = std::min(p.cost(mode, last)(t, x), chain_cost);
                    exec.switches.push_back({k, mode, last, cost});
                    costs += cost;
                    mode = last;
                }
            }
            exec.payoff_integral += p.payoff(mode)(t, x) * dt;
        }
        exec.profit = exec.payoff_integral - costs;
    }
    return out;
}

ValueEstimate estimate_value(std::span<const ExecutedStrategy> executions) {
    const auto n = executions.size();
    if (n < 2) throw InvalidInput("value estimate needs at least two executions");
    double mean = 0.0;
    for (const auto& e : executions) mean += e.profit;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& e : executions) ss += (e.profit - mean) * (e.profit - mean);
    const double variance = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(variance / static_cast<double>(n)), n};
}

double SwitchTailStats::at(std::size_t n) const {
    if (n == 0) return 1.0;
    return n <= frequency.size() ? frequency[n - 1] : 0.0;
}

SwitchTailStats switch_count_tail(std::span<const ExecutedStrategy> executions,
                                  std::size_t start_mode) {
    if (executions.empty()) throw InvalidInput("switch tail needs at least one execution");
    std::size_t most = 0;
    for (const auto& e : executions) most = std::max(most, e.switches.size());
    std::vector<std::size_t> at_least(most + 2, 0);
    for (const auto& e : executions) {
        for (std::size_t n = 1; n <= e.switches.size(); ++n) ++at_least[n];
    }
    SwitchTailStats stats{start_mode, executions.size(), {}};
    for (std::size_t n = 1; n <= most + 1; ++n) {
        stats.frequency.push_back(static_cast<double>(at_least[n]) /
                                  static_cast<double>(executions.size()));
    }
    return stats;
}

void write_executions_csv(std::ostream& out, std::span<const ExecutedStrategy> executions,
                          const TimeGrid& grid) {
    const auto old_precision = out.precision(17);
    out << "path_id,switch_time,from,to,cost\n";
    for (std::size_t p = 0; p < executions.size(); ++p) {
        for (const auto& s : executions[p].switches) {
            out << p << ',' << grid.time(s.time_index) << ',' << s.from + 1 << ',' << s.to + 1
                << ',' << s.cost << '\n';
        }
    }
    out.precision(old_precision);
}

void write_tail_csv(std::ostream& out, const SwitchTailStats& tail) {
    const auto old_precision = out.precision(17);
    out << "n,frequency\n";
    for (std::size_t n = 1; n <= tail.frequency.size(); ++n) {
        out << n << ',' << tail.frequency[n - 1] << '\n';
    }
    out.precision(old_precision);
}

} // namespace switchflow
