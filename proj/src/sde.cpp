#include "switchflow/sde.hpp"

#include "switchflow/errors.hpp"
#include "switchflow/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace switchflow {

TimeGrid::TimeGrid(double t_start, double horizon_end, std::size_t steps)
    : t_start_(t_start), horizon_end_(horizon_end), steps_(steps) {
    if (!std::isfinite(t_start) || !std::isfinite(horizon_end) || !(t_start < horizon_end)) {
        throw InvalidInput("time grid needs finite t_start < horizon_end");
    }
    if (steps < 1) throw InvalidInput("time grid needs at least one step");
}

TimeGrid TimeGrid::over(const SwitchingProblem& p, std::size_t steps) {
    return {0.0, p.horizon(), steps};
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths, double x0, std::uint64_t seed)
    : grid_(grid), n_paths_(n_paths), x0_(x0), seed_(seed),
      values_(n_paths * (grid.steps() + 1), x0) {}

PathEnsemble simulate_paths(const SwitchingProblem& p, const TimeGrid& grid, double x0,
                            std::size_t n_paths, std::uint64_t seed, std::size_t start_index) {
    if (n_paths < 1) throw InvalidInput("simulate_paths needs n_paths >= 1");
    if (!std::isfinite(x0)) throw InvalidInput("start state must be finite");
    if (start_index > grid.steps()) throw InvalidInput("start index beyond the time grid");

    PathEnsemble ensemble(grid, n_paths, x0, seed);
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const auto& drift = p.drift();
    const auto& vol = p.volatility();

    for (std::size_t path = 0; path < n_paths; ++path) {
        auto xs = ensemble.path(path);
        std::array<double, 2> noise{};
        for (std::size_t k = start_index; k < grid.steps(); ++k) {
            const std::size_t draw = k - start_index;
            if (draw % 2 == 0) noise = normal_pair(seed, path, draw / 2);
            const double t = grid.time(k);
            const double x = xs[k];
            const double next = x + drift(t, x) * dt + vol(t, x) * sqrt_dt * noise[draw % 2];
            if (!std::isfinite(next)) {
                std::ostringstream os;
                os << "non-finite state on path " << path << " at step " << k + 1;
                throw SimulationFailure(os.str());
            }
            xs[k + 1] = next;
        }
    }
    return ensemble;
}

void write_paths_csv(std::ostream& out, const PathEnsemble& paths) {
    const auto old_precision = out.precision(17);
    out << "path_id,t,x\n";
    for (std::size_t p = 0; p < paths.path_count(); ++p) {
        for (std::size_t k = 0; k <= paths.grid().steps(); ++k) {
            out << p << ',' << paths.grid().time(k) << ',' << paths.at(p, k) << '\n';
        }
    }
    out.precision(old_precision);
}

MarkovChainLattice::MarkovChainLattice(TimeGrid grid, std::vector<Level> levels)
    : grid_(grid), levels_(std::move(levels)) {
    if (levels_.size() != grid_.steps() + 1) {
        throw InvalidInput("lattice needs one level per time index");
    }
    for (std::size_t k = 0; k < grid_.steps(); ++k) {
        const auto& level = levels_[k];
        if (level.row_start.size() != level.states.size() + 1) {
            throw InvalidInput("lattice level has malformed transition rows");
        }
        for (std::size_t n = 0; n < level.states.size(); ++n) {
            double total = 0.0;
            for (const auto& tr : row(k, n)) {
                if (tr.to >= levels_[k + 1].states.size() || !(tr.prob >= 0.0 && tr.prob <= 1.0)) {
                    throw LatticeConstructionError("lattice transition out of range");
                }
                total += tr.prob;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw LatticeConstructionError("lattice transition row does not sum to one");
            }
        }
    }
}

std::span<const Transition> MarkovChainLattice::row(std::size_t k, std::size_t node) const {
    const auto& level = levels_.at(k);
    if (k >= grid_.steps()) return {};
    return {level.transitions.data() + level.row_start.at(node),
            level.row_start.at(node + 1) - level.row_start[node]};
}

double MarkovChainLattice::min_state() const {
    double lo = levels_.front().states.front();
    for (const auto& level : levels_) lo = std::min(lo, level.states.front());
    return lo;
}

double MarkovChainLattice::max_state() const {
    double hi = levels_.front().states.back();
    for (const auto& level : levels_) hi = std::max(hi, level.states.back());
    return hi;
}

namespace {

bool same_state(double a, double b) {
    return std::abs(a - b) <= 1e-11 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

std::vector<MarkovChainLattice::Level> binomial_levels(const SwitchingProblem& p,
                                                       const TimeGrid& grid, double x0) {
    if (grid.steps() > kMaxBinomialSteps) {
        throw InvalidInput("binomial lattice limited to " + std::to_string(kMaxBinomialSteps) +
                           " steps; use the trinomial style for finer grids");
    }
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    std::vector<MarkovChainLattice::Level> levels(grid.steps() + 1);
    levels[0].states = {x0};

    for (std::size_t k = 0; k < grid.steps(); ++k) {
        auto& level = levels[k];
        const double t = grid.time(k);
        std::vector<double> candidates;
        candidates.reserve(2 * level.states.size());
        for (double x : level.states) {
            const double centre = x + p.drift()(t, x) * dt;
            const double spread = std::abs(p.volatility()(t, x)) * sqrt_dt;
            candidates.push_back(centre - spread);
            candidates.push_back(centre + spread);
        }
        for (double c : candidates) {
            if (!std::isfinite(c)) throw LatticeConstructionError("non-finite lattice state");
        }
        std::vector<double> sorted = candidates;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> next;
        for (double c : sorted) {
            if (next.empty() || !same_state(next.back(), c)) next.push_back(c);
        }
        auto index_of = [&next](double c) {
            auto it = std::lower_bound(next.begin(), next.end(), c);
            if (it != next.end() && same_state(*it, c)) return std::size_t(it - next.begin());
            return std::size_t(it - next.begin() - 1);
        };

        level.row_start.push_back(0);
        for (std::size_t n = 0; n < level.states.size(); ++n) {
            const auto down = index_of(candidates[2 * n]);
            const auto up = index_of(candidates[2 * n + 1]);
            if (down == up) {
                level.transitions.push_back({down, 1.0});
            } else {
                level.transitions.push_back({down, 0.5});
                level.transitions.push_back({up, 0.5});
            }
            level.row_start.push_back(level.transitions.size());
        }
        levels[k + 1].states = std::move(next);
    }
    return levels;
}

std::vector<MarkovChainLattice::Level> trinomial_levels(const SwitchingProblem& p,
                                                        const TimeGrid& grid, double x0) {
    const double dt = grid.dt();
    const double sigma0 = std::abs(p.volatility()(grid.t_start(), x0));
    const double h = std::sqrt(3.0 * dt) * (sigma0 > 0.0 ? sigma0 : 1.0);
    std::vector<MarkovChainLattice::Level> levels(grid.steps() + 1);

    for (std::size_t k = 0; k <= grid.steps(); ++k) {
        const auto width = static_cast<long>(k);
        for (long j = -width; j <= width; ++j) {
            levels[k].states.push_back(x0 + static_cast<double>(j) * h);
        }
    }
    for (std::size_t k = 0; k < grid.steps(); ++k) {
        auto& level = levels[k];
        const double t = grid.time(k);
        level.row_start.push_back(0);
        for (std::size_t n = 0; n < level.states.size(); ++n) {
            const double x = level.states[n];
            const double mean = p.drift()(t, x) * dt / h;
            const double sigma = p.volatility()(t, x);
            const double second = (sigma * sigma * dt) / (h * h) + mean * mean;
            const double up = 0.5 * (second + mean);
            const double down = 0.5 * (second - mean);
            const double mid = 1.0 - up - down;
            if (up < 0.0 || down < 0.0 || mid < 0.0 || up > 1.0 || down > 1.0) {
                std::ostringstream os;
                os << "trinomial probabilities leave [0,1] at t=" << t << ", x=" << x
                   << "; use a finer time grid";
                throw LatticeConstructionError(os.str());
            }
            // Node n at level k sits at offset j = n - k; level k + 1 index is n + 1 + move.
            if (down > 0.0) level.transitions.push_back({n, down});
            if (mid > 0.0) level.transitions.push_back({n + 1, mid});
            if (up > 0.0) level.transitions.push_back({n + 2, up});
            level.row_start.push_back(level.transitions.size());
        }
    }
    return levels;
}

} // namespace

MarkovChainLattice build_lattice(const SwitchingProblem& p, const TimeGrid& grid, double x0,
                                 LatticeStyle style) {
    if (!std::isfinite(x0)) throw InvalidInput("lattice start state must be finite");
    auto levels = style == LatticeStyle::binomial ? binomial_levels(p, grid, x0)
                                                  : trinomial_levels(p, grid, x0);
    return MarkovChainLattice(grid, std::move(levels));
}

} // namespace switchflow
