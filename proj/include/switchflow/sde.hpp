#pragma once

#include "switchflow/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace switchflow {

/// Uniform grid t_k = t_start + k * dt, k = 0..steps, with t_steps = horizon_end.
class TimeGrid {
public:
    /// Throws InvalidInput unless t_start < horizon_end and steps >= 1.
    TimeGrid(double t_start, double horizon_end, std::size_t steps);

    /// Grid on [0, p.horizon()].
    static TimeGrid over(const SwitchingProblem& p, std::size_t steps);

    double t_start() const noexcept { return t_start_; }
    double horizon_end() const noexcept { return horizon_end_; }
    std::size_t steps() const noexcept { return steps_; }
    double dt() const noexcept { return (horizon_end_ - t_start_) / static_cast<double>(steps_); }
    double time(std::size_t k) const noexcept {
        return k == steps_ ? horizon_end_ : t_start_ + static_cast<double>(k) * dt();
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_start_;
    double horizon_end_;
    std::size_t steps_;
};

/// Simulated states, one row of steps + 1 values per path.
class PathEnsemble {
public:
    PathEnsemble(TimeGrid grid, std::size_t n_paths, double x0, std::uint64_t seed);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t path_count() const noexcept { return n_paths_; }
    double start_state() const noexcept { return x0_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const double> path(std::size_t p) const {
        return {values_.data() + p * width(), width()};
    }
    std::span<double> path(std::size_t p) { return {values_.data() + p * width(), width()}; }
    double at(std::size_t p, std::size_t k) const { return values_[p * width() + k]; }

private:
    std::size_t width() const noexcept { return grid_.steps() + 1; }

    TimeGrid grid_;
    std::size_t n_paths_;
    double x0_;
    std::uint64_t seed_;
    std::vector<double> values_;
};

/**
 * Euler-Maruyama paths of dX = b dt + sigma dB started at x0.
 *
 * Path p draws its noise from Philox stream p under `seed`, so the ensemble is
 * a pure function of the arguments and path p never depends on n_paths.
 * Indices k <= start_index hold x0 (the process is started at t_{start_index}).
 * Throws SimulationFailure naming the path and step on a non-finite state.
 */
PathEnsemble simulate_paths(const SwitchingProblem& p, const TimeGrid& grid, double x0,
                            std::size_t n_paths, std::uint64_t seed, std::size_t start_index = 0);

/// CSV with header `path_id,t,x`.
void write_paths_csv(std::ostream& out, const PathEnsemble& paths);

enum class LatticeStyle { binomial, trinomial };

inline constexpr std::size_t kMaxBinomialSteps = 25;

struct Transition {
    std::size_t to;
    double prob;
};

/**
 * Finite-state Markov chain on the time grid. Level k holds sorted states
 * and, for k < steps, a row-stochastic transition row per state into level k + 1.
 */
class MarkovChainLattice {
public:
    struct Level {
        std::vector<double> states;
        std::vector<std::size_t> row_start; ///< states.size() + 1 offsets into transitions
        std::vector<Transition> transitions;
    };

    MarkovChainLattice(TimeGrid grid, std::vector<Level> levels);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t steps() const noexcept { return grid_.steps(); }
    std::span<const double> states(std::size_t k) const { return levels_.at(k).states; }
    std::size_t node_count(std::size_t k) const { return levels_.at(k).states.size(); }
    std::span<const Transition> row(std::size_t k, std::size_t node) const;

    double min_state() const;
    double max_state() const;

private:
    TimeGrid grid_;
    std::vector<Level> levels_;
};

/**
 * Local-consistency lattice for the state diffusion started at x0.
 *
 * binomial: successors x + b dt +/- sigma sqrt(dt) with probability 1/2,
 * merged when they coincide (recombining for constant coefficients, a single
 * certain successor when sigma = 0). Limited to kMaxBinomialSteps steps.
 *
 * trinomial: uniform grid x0 + j h with h = sigma(t0, x0) sqrt(3 dt), moves to
 * j - 1, j, j + 1 with probabilities matching mean b dt and second moment
 * sigma^2 dt + (b dt)^2. Throws LatticeConstructionError when a probability
 * leaves [0, 1].
 */
MarkovChainLattice build_lattice(const SwitchingProblem& p, const TimeGrid& grid, double x0,
                                 LatticeStyle style);

} // namespace switchflow
