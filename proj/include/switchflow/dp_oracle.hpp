#pragma once

#include "switchflow/model.hpp"
#include "switchflow/sde.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace switchflow {

/// Per-level node values on a lattice: values[k][node].
using NodeValues = std::vector<std::vector<double>>;

/**
 * Smallest supermartingale dominating `reward` on the lattice:
 * R_N = reward_N, R_k = max(reward_k, E[R_{k+1} | node]).
 * Throws InvalidInput when reward does not match the lattice shape.
 */
NodeValues snell_value(const MarkovChainLattice& lattice, const NodeValues& reward);

/// Discrete value processes Y^i of the switching problem: values[mode][k][node].
struct LatticeValues {
    std::vector<NodeValues> values;

    double root(std::size_t mode) const { return values.at(mode).at(0).at(0); }
};

/**
 * Backward induction for the switching system on a lattice.
 *
 * Y^i_N = 0; c_i = psi_i(t_k, x) dt + E[Y^i_{k+1}]; Y^i_k = max(c_i, max_{j != i}(c_j - g_ij)).
 * The single projection is exact only under the strict triangle inequality, so
 * the problem must pass validate_problem on the lattice's state range.
 */
LatticeValues switching_value_dp(const MarkovChainLattice& lattice, const SwitchingProblem& p);

void write_lattice_values_csv(std::ostream& out, const MarkovChainLattice& lattice,
                              const LatticeValues& values);

struct StrategyDecision {
    std::size_t time_index;
    std::vector<std::size_t> history; ///< lattice node index at levels 0..time_index
    std::size_t from;
    std::size_t to;
};

struct StrategyDescription {
    /// Switches taken by the best strategy on histories it reaches, in tree order.
    std::vector<StrategyDecision> switches;
    /// True when `switches` was cut at kMaxRecordedDecisions.
    bool truncated = false;

    std::string to_string(const TimeGrid& grid) const;
};

struct EnumerationResult {
    double best_value;
    StrategyDescription best_strategy;
};

inline constexpr double kMaxStrategyNodes = 1e7;
inline constexpr std::size_t kMaxRecordedDecisions = 64;

/**
 * Brute-force search over adapted pure switching strategies.
 *
 * Walks the non-recombining history tree of the lattice; at every history node
 * the controller either stays or switches once (at most max_switches switches
 * per path) and the best expected profit, integral of psi_u dt minus switching
 * costs, is returned. Ties go to the smallest target mode. Throws InvalidInput
 * with a size estimate when histories * modes * (max_switches + 1) exceeds
 * kMaxStrategyNodes.
 */
EnumerationResult enumerate_strategies(const MarkovChainLattice& lattice, const SwitchingProblem& p,
                                       std::size_t start_mode, std::size_t max_switches);

} // namespace switchflow
