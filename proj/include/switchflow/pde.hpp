#pragma once

#include "switchflow/model.hpp"
#include "switchflow/sde.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace switchflow {

/// Uniform grid in x, or in log x when log_space is set (then x_min > 0).
class SpaceGrid {
public:
    SpaceGrid(double x_min, double x_max, std::size_t nodes, bool log_space = false);

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t nodes() const noexcept { return nodes_; }
    bool log_space() const noexcept { return log_space_; }

    /// Spacing in the solver coordinate (x or log x).
    double spacing() const noexcept { return (hi_ - lo_) / static_cast<double>(nodes_ - 1); }
    double coordinate(std::size_t j) const noexcept;
    /// State value x_j at node j.
    double state(std::size_t j) const noexcept;
    /// Nearest node to state x; states outside the grid clamp to the end nodes.
    std::size_t nearest(double x) const noexcept;

    /// Linear interpolation in the solver coordinate, clamped at the ends.
    double interpolate(std::span<const double> values, double x) const;

    friend bool operator==(const SpaceGrid&, const SpaceGrid&) = default;

private:
    double to_coordinate(double x) const noexcept;

    double x_min_;
    double x_max_;
    std::size_t nodes_;
    bool log_space_;
    double lo_;
    double hi_;
};

/**
 * Default truncation around x0: 5 standard deviations of the driving noise
 * over the horizon plus the drift displacement, so the 4-sd envelope is interior.
 * Log-space grids use the constant log-volatility of multiplicative dynamics.
 */
SpaceGrid auto_space_grid(const SwitchingProblem& p, double x0, std::size_t nodes,
                          bool log_space);

enum class Scheme { explicit_euler, implicit_euler };

struct Grids {
    TimeGrid time;
    SpaceGrid space;
};

inline constexpr double kObstacleTolerance = 1e-9;

/// Candidate values v_i(t_k, x_j) for every mode on the full time-space grid.
class ValueSurface {
public:
    ValueSurface(std::size_t modes, Grids grids, Scheme scheme);

    std::size_t modes() const noexcept { return modes_; }
    const Grids& grids() const noexcept { return grids_; }
    Scheme scheme() const noexcept { return scheme_; }

    std::span<const double> slice(std::size_t mode, std::size_t k) const;
    std::span<double> slice(std::size_t mode, std::size_t k);
    double at(std::size_t mode, std::size_t k, std::size_t j) const { return slice(mode, k)[j]; }

    /// v_i(t_k, x) by linear interpolation (diagnostics only).
    double value_at(std::size_t mode, std::size_t k, double x) const;
    double max_norm() const noexcept;
    /// Largest |a - b| over all entries; grids and mode counts must match.
    double max_difference(const ValueSurface& other) const;

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::size_t modes_;
    Grids grids_;
    Scheme scheme_;
    std::vector<double> data_;
};

/// The PDE residual is the step residual v_k - v_{k+1} - dt (A v + psi), in the
/// same units as v - obstacle so the two can share one min().
struct ResidualReport {
    double max_pde_residual = 0.0;       ///< largest violation of the supersolution inequality
    double max_obstacle_violation = 0.0; ///< largest obstacle - v
    double complementarity_defect = 0.0; ///< largest |min(v - obstacle, residual)|
};

/**
 * One backward step of d_t v + A v + psi_mode = 0 from t + dt to t.
 *
 * A is discretised with a centred second difference and a first difference
 * upwinded by the sign of the drift. End nodes keep only the inward upwind
 * drift term, which keeps the step monotone without boundary data.
 * explicit: v_next + dt (A v_next + psi); implicit: (I - dt A) c = v_next + dt psi.
 * Throws CflViolation when the explicit step exceeds the stability limit.
 */
std::vector<double> pde_step(std::span<const double> v_next, std::size_t mode, double t,
                             const SwitchingProblem& p, const SpaceGrid& space, double dt,
                             Scheme scheme);

/// Largest explicit step allowed at time t: 1 / max_j (2 a_j / h^2 + |mu_j| / h).
double explicit_step_limit(const SwitchingProblem& p, const SpaceGrid& space, double t);

/**
 * Enforces v_i >= max_{j != i}(v_j - g_ij) node by node.
 *
 * The first sweep is the direct projection max(c_i, max_j(c_j - g_ij)); further
 * sweeps repeat it until nothing changes, which can only happen when the strict
 * triangle inequality fails. Throws InternalError if the sweeps do not settle
 * within mode_count sweeps (a free switching loop).
 */
std::vector<std::vector<double>> obstacle_project(const std::vector<std::vector<double>>& slices,
                                                  double t, const SwitchingProblem& p,
                                                  const SpaceGrid& space);

/// One direct projection sweep, without the closure.
std::vector<std::vector<double>>
obstacle_project_once(const std::vector<std::vector<double>>& slices, double t,
                      const SwitchingProblem& p, const SpaceGrid& space);

/// Residuals of the variational inequality on interior nodes (k < N, 0 < j < Nx - 1).
ResidualReport residual_report(const ValueSurface& surface, const SwitchingProblem& p);

struct SolveResult {
    ValueSurface surface;
    ResidualReport residuals;
};

/**
 * Backward sweep from the zero terminal slice: pde_step for every mode, then
 * obstacle_project, at each time level. Requires require_solvable on the grid's
 * state range.
 */
SolveResult solve_system(const SwitchingProblem& p, const Grids& grids, Scheme scheme);

/// Obstacle-free solve for a single payoff.
ValueSurface solve_linear(const SwitchingProblem& p, const Grids& grids, Scheme scheme);

struct PicardOptions {
    std::size_t max_iters = 50;
    double tol = 1e-8;
    double monotonicity_tol = 1e-10;
    /// Keep every iterate; otherwise only the first and the last are returned.
    bool keep_all = true;
};

struct PicardResult {
    std::vector<ValueSurface> iterates;
    std::vector<double> gaps; ///< max-norm change at iterations 1, 2, ...
    bool converged = false;
    std::size_t iterations = 0;

    const ValueSurface& final_surface() const { return iterates.back(); }
};

/**
 * Picard iteration on the interconnected obstacles.
 *
 * Iterate 0 solves each mode without obstacle. Iterate n solves, mode by mode,
 * the optimal stopping problem whose obstacle is max_{j != i}(v^{n-1}_j - g_ij).
 * Iterates must be nondecreasing; a drop beyond monotonicity_tol throws
 * InternalError naming the node. Stops when the max-norm change is below tol.
 */
PicardResult picard_solve(const SwitchingProblem& p, const Grids& grids, Scheme scheme,
                          const PicardOptions& options = {});

/// CSV with header `mode,t,x,value`, rows ordered by t then x.
void write_surface_csv(std::ostream& out, const ValueSurface& surface, std::size_t mode);

} // namespace switchflow
