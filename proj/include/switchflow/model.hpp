#pragma once

#include "switchflow/coefficient.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace switchflow {

inline constexpr double kDefaultLoopFloor = 1e-6;

/**
 * Finite-horizon optimal switching problem with m operating modes.
 *
 * Modes are 0-based here; the CLI and all text output use 1-based labels.
 * The state follows dX = b(t, X) dt + sigma(t, X) dB on [0, horizon].
 */
class SwitchingProblem {
public:
    /// Throws InvalidInput unless m >= 2, shapes agree, horizon > 0,
    /// loop_floor > 0 and every diagonal cost is the zero function.
    SwitchingProblem(std::vector<CoefficientFunction> payoffs,
                     std::vector<std::vector<CoefficientFunction>> costs,
                     CoefficientFunction drift, CoefficientFunction volatility, double horizon,
                     double loop_floor = kDefaultLoopFloor);

    std::size_t mode_count() const noexcept { return payoffs_.size(); }
    const CoefficientFunction& payoff(std::size_t i) const { return payoffs_.at(i); }
    const CoefficientFunction& cost(std::size_t i, std::size_t j) const { return costs_.at(i).at(j); }
    const std::vector<CoefficientFunction>& payoffs() const noexcept { return payoffs_; }
    const std::vector<std::vector<CoefficientFunction>>& costs() const noexcept { return costs_; }
    const CoefficientFunction& drift() const noexcept { return drift_; }
    const CoefficientFunction& volatility() const noexcept { return volatility_; }
    double horizon() const noexcept { return horizon_; }
    double loop_floor() const noexcept { return loop_floor_; }

    SwitchingProblem with_payoffs(std::vector<CoefficientFunction> payoffs) const;
    SwitchingProblem with_costs(std::vector<std::vector<CoefficientFunction>> costs) const;

    /// Multiplicative dynamics (b = a x, sigma = s x) admit a constant-coefficient log transform.
    bool has_multiplicative_dynamics() const noexcept;

private:
    std::vector<CoefficientFunction> payoffs_;
    std::vector<std::vector<CoefficientFunction>> costs_;
    CoefficientFunction drift_;
    CoefficientFunction volatility_;
    double horizon_;
    double loop_floor_;
};

enum class Rule { zero_diagonal, nonnegative_cost, strict_triangle, loop_floor };

std::string_view rule_id(Rule rule) noexcept;

struct Violation {
    Rule rule;
    std::vector<std::size_t> modes; ///< (i, j) or (i, j, k), 0-based
    double t;
    double x;
    double margin; ///< worst value of lhs - rhs found
};

struct ValidationReport {
    bool passed = true;
    /// False when some cost is opaque and the domain was only sampled.
    bool certified = true;
    std::vector<Violation> violations;

    bool violates(Rule rule) const noexcept;
    std::string summary() const;
};

struct ValidationOptions {
    /// Grid nodes per axis when an opaque cost forces sampling.
    std::size_t sample_nodes = 101;
    /// Strict inequalities must clear this margin; only meaningful for sampled checks.
    double strict_slack = 0.0;
};

/**
 * Checks the structural cost assumptions on [0, T] x [x_min, x_max]:
 * g_ii = 0, g_ij >= 0, g_ij + g_jk > g_ik for distinct i, j, k, and
 * g_ij + g_ji > loop_floor. For affine costs every condition is affine on
 * each half-line of x and in t, so the rectangle corners plus x = 0 decide it.
 */
ValidationReport validate_problem(const SwitchingProblem& p, double x_min, double x_max,
                                  const ValidationOptions& options = {});

/// Throws InvalidInput listing the violations unless the report passed.
void require_valid(const ValidationReport& report);

/// Like require_valid but tolerates strict-triangle violations, which the
/// closure projection in the PDE solver handles.
void require_solvable(const ValidationReport& report);

} // namespace switchflow
