#pragma once

#include "switchflow/model.hpp"
#include "switchflow/pde.hpp"
#include "switchflow/sde.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace switchflow {

/// Feedback switching rule on the solver grid: target(i, k, j) == i means stay.
class SwitchingPolicy {
public:
    /// Stay everywhere.
    SwitchingPolicy(std::size_t modes, Grids grids, double switch_tolerance = 0.0);

    std::size_t modes() const noexcept { return modes_; }
    const Grids& grids() const noexcept { return grids_; }
    double switch_tolerance() const noexcept { return switch_tolerance_; }

    std::size_t target(std::size_t mode, std::size_t k, std::size_t j) const {
        return targets_[index(mode, k, j)];
    }
    bool switches(std::size_t mode, std::size_t k, std::size_t j) const {
        return target(mode, k, j) != mode;
    }
    /// Throws InvalidInput for targets out of range or any switch at the terminal index.
    void set_target(std::size_t mode, std::size_t k, std::size_t j, std::size_t to);

private:
    std::size_t index(std::size_t mode, std::size_t k, std::size_t j) const {
        return (mode * (grids_.time.steps() + 1) + k) * grids_.space.nodes() + j;
    }

    std::size_t modes_;
    Grids grids_;
    double switch_tolerance_;
    std::vector<std::size_t> targets_;
};

/// 1e-7 * (1 + max-norm of the surface).
double default_switch_tolerance(const ValueSurface& surface);

/**
 * Switch wherever the obstacle binds: v_i <= max_{l != i}(v_l - g_il) + tolerance,
 * towards the smallest maximising mode. Never switches at the terminal index.
 */
SwitchingPolicy extract_policy(const ValueSurface& surface, const SwitchingProblem& p,
                               double switch_tolerance);

struct SwitchEvent {
    std::size_t time_index;
    std::size_t from;
    std::size_t to;
    double cost;
};

struct ExecutedStrategy {
    std::vector<SwitchEvent> switches;
    double payoff_integral = 0.0;
    double profit = 0.0; ///< payoff_integral minus the switching costs paid
};

/**
 * Runs the policy along every path from start_mode.
 *
 * Paths map to the nearest grid node. A chain of switches at one node is
 * recorded as a single switch to the chain's last mode, charged the cheaper of
 * the direct cost and the chain's summed cost (equal to the direct cost under
 * the strict triangle inequality). Payoff accrues by the left-endpoint rule and
 * nothing is charged at the terminal time.
 */
std::vector<ExecutedStrategy> simulate_strategy(const SwitchingPolicy& policy,
                                                const PathEnsemble& paths,
                                                const SwitchingProblem& p, std::size_t start_mode);

struct ValueEstimate {
    double mean;
    double std_error;
    std::size_t n;
};

/// Sample mean and standard error of the realised profits; needs two or more executions.
ValueEstimate estimate_value(std::span<const ExecutedStrategy> executions);

struct SwitchTailStats {
    std::size_t start_mode;
    std::size_t sample_size;
    /// frequency[n - 1] = share of paths with at least n switches before the horizon.
    std::vector<double> frequency;

    /// P[tau_n < T] estimate; zero beyond the table.
    double at(std::size_t n) const;
};

SwitchTailStats switch_count_tail(std::span<const ExecutedStrategy> executions,
                                  std::size_t start_mode);

/// CSV with header `path_id,switch_time,from,to,cost`.
void write_executions_csv(std::ostream& out, std::span<const ExecutedStrategy> executions,
                          const TimeGrid& grid);
/// CSV with header `n,frequency`.
void write_tail_csv(std::ostream& out, const SwitchTailStats& tail);

} // namespace switchflow
