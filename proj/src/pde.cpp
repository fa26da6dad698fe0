#include "switchflow/pde.hpp"

#include "switchflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace switchflow {

SpaceGrid::SpaceGrid(double x_min, double x_max, std::size_t nodes, bool log_space)
    : x_min_(x_min), x_max_(x_max), nodes_(nodes), log_space_(log_space) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
        throw InvalidInput("space grid needs finite x_min < x_max");
    }
    if (nodes < 3) throw InvalidInput("space grid needs at least 3 nodes");
    if (log_space && !(x_min > 0.0)) throw InvalidInput("log-space grid needs x_min > 0");
    lo_ = to_coordinate(x_min);
    hi_ = to_coordinate(x_max);
}

double SpaceGrid::to_coordinate(double x) const noexcept { return log_space_ ? std::log(x) : x; }

double SpaceGrid::coordinate(std::size_t j) const noexcept {
    if (j + 1 == nodes_) return hi_;
    return lo_ + static_cast<double>(j) * spacing();
}

double SpaceGrid::state(std::size_t j) const noexcept {
    if (j == 0) return x_min_;
    if (j + 1 == nodes_) return x_max_;
    return log_space_ ? std::exp(coordinate(j)) : coordinate(j);
}

std::size_t SpaceGrid::nearest(double x) const noexcept {
    if (log_space_ && !(x > 0.0)) return 0;
    const double y = to_coordinate(x);
    if (!(y > lo_)) return 0;
    if (!(y < hi_)) return nodes_ - 1;
    const auto j = static_cast<std::size_t>(std::floor((y - lo_) / spacing() + 0.5));
    return std::min(j, nodes_ - 1);
}

double SpaceGrid::interpolate(std::span<const double> values, double x) const {
    if (values.size() != nodes_) throw InvalidInput("interpolation needs one value per node");
    if (log_space_ && !(x > 0.0)) return values.front();
    const double y = to_coordinate(x);
    if (!(y > lo_)) return values.front();
    if (!(y < hi_)) return values.back();
    const double s = (y - lo_) / spacing();
    const auto j = std::min(static_cast<std::size_t>(s), nodes_ - 2);
    const double w = s - static_cast<double>(j);
    return (1.0 - w) * values[j] + w * values[j + 1];
}

SpaceGrid auto_space_grid(const SwitchingProblem& p, double x0, std::size_t nodes,
                          bool log_space) {
    const double horizon = p.horizon();
    if (log_space) {
        if (!p.has_multiplicative_dynamics() || !(x0 > 0.0)) {
            throw InvalidInput("automatic log-space grid needs multiplicative dynamics and x0 > 0");
        }
        const double s = std::abs(p.volatility().affine().x_coef);
        const double mu = p.drift().affine().x_coef - 0.5 * s * s;
        const double half = 5.0 * s * std::sqrt(horizon) + std::abs(mu) * horizon;
        return {x0 * std::exp(-half), x0 * std::exp(half), nodes, true};
    }
    const double sigma = std::abs(p.volatility()(0.0, x0));
    const double b = std::abs(p.drift()(0.0, x0));
    const double half = std::max(1.0, 5.0 * sigma * std::sqrt(horizon) + b * horizon);
    return {x0 - half, x0 + half, nodes, false};
}

ValueSurface::ValueSurface(std::size_t modes, Grids grids, Scheme scheme)
    : modes_(modes), grids_(std::move(grids)), scheme_(scheme),
      data_(modes * (grids_.time.steps() + 1) * grids_.space.nodes(), 0.0) {}

std::span<const double> ValueSurface::slice(std::size_t mode, std::size_t k) const {
    const auto nx = grids_.space.nodes();
    return {data_.data() + (mode * (grids_.time.steps() + 1) + k) * nx, nx};
}

std::span<double> ValueSurface::slice(std::size_t mode, std::size_t k) {
    const auto nx = grids_.space.nodes();
    return {data_.data() + (mode * (grids_.time.steps() + 1) + k) * nx, nx};
}

double ValueSurface::value_at(std::size_t mode, std::size_t k, double x) const {
    return grids_.space.interpolate(slice(mode, k), x);
}

double ValueSurface::max_norm() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double ValueSurface::max_difference(const ValueSurface& other) const {
    if (other.data_.size() != data_.size()) throw InvalidInput("surfaces have different shapes");
    double m = 0.0;
    for (std::size_t n = 0; n < data_.size(); ++n) m = std::max(m, std::abs(data_[n] - other.data_[n]));
    return m;
}

namespace {

// A u_j = lower_j (u_{j-1} - u_j) + upper_j (u_{j+1} - u_j); rows sum to zero.
struct Stencil {
    std::vector<double> lower;
    std::vector<double> upper;
};

Stencil generator_stencil(const SwitchingProblem& p, const SpaceGrid& space, double t) {
    const auto n = space.nodes();
    const double h = space.spacing();
    Stencil st{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t j = 0; j < n; ++j) {
        const double x = space.state(j);
        double diffusion;
        double mu;
        if (space.log_space()) {
            const double s = p.volatility()(t, x) / x;
            diffusion = 0.5 * s * s;
            mu = p.drift()(t, x) / x - diffusion;
        } else {
            const double sigma = p.volatility()(t, x);
            diffusion = 0.5 * sigma * sigma;
            mu = p.drift()(t, x);
        }
        const double up_drift = std::max(mu, 0.0) / h;
        const double down_drift = std::max(-mu, 0.0) / h;
        if (j == 0) {
            st.upper[j] = up_drift;
        } else if (j + 1 == n) {
            st.lower[j] = down_drift;
        } else {
            st.lower[j] = diffusion / (h * h) + down_drift;
            st.upper[j] = diffusion / (h * h) + up_drift;
        }
    }
    return st;
}

double apply_generator(const Stencil& st, std::span<const double> u, std::size_t j) {
    double a = 0.0;
    if (j > 0) a += st.lower[j] * (u[j - 1] - u[j]);
    if (j + 1 < u.size()) a += st.upper[j] * (u[j + 1] - u[j]);
    return a;
}

std::vector<double> solve_tridiagonal(const Stencil& st, double dt, std::vector<double> rhs) {
    const auto n = rhs.size();
    std::vector<double> c_prime(n, 0.0);
    double denom = 1.0 + dt * (st.lower[0] + st.upper[0]);
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0) {
            const double sub = -dt * st.lower[j];
            denom = 1.0 + dt * (st.lower[j] + st.upper[j]) - sub * c_prime[j - 1];
            rhs[j] -= sub * rhs[j - 1];
        }
        if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) {
            std::ostringstream os;
            os << "singular tridiagonal system at node " << j << " (pivot " << denom << ")";
            throw InternalError(os.str());
        }
        c_prime[j] = -dt * st.upper[j] / denom;
        rhs[j] /= denom;
    }
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= c_prime[j] * rhs[j + 1];
    return rhs;
}

std::vector<double> obstacle_for(const std::vector<std::vector<double>>& values, std::size_t i,
                                 double t, const SwitchingProblem& p, const SpaceGrid& space) {
    std::vector<double> obstacle(space.nodes(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < p.mode_count(); ++j) {
        if (j == i) continue;
        const auto& cost = p.cost(i, j);
        for (std::size_t n = 0; n < space.nodes(); ++n) {
            obstacle[n] = std::max(obstacle[n], values[j][n] - cost(t, space.state(n)));
        }
    }
    return obstacle;
}

void check_grid_matches(const SwitchingProblem& p, const Grids& grids) {
    if (grids.time.t_start() < 0.0 || grids.time.horizon_end() != p.horizon()) {
        throw InvalidInput("time grid must end at the problem horizon");
    }
}

std::vector<std::vector<double>> slices_at(const ValueSurface& s, std::size_t k) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < s.modes(); ++i) {
        auto sl = s.slice(i, k);
        out.emplace_back(sl.begin(), sl.end());
    }
    return out;
}

} // namespace

double explicit_step_limit(const SwitchingProblem& p, const SpaceGrid& space, double t) {
    const auto st = generator_stencil(p, space, t);
    double rate = 0.0;
    for (std::size_t j = 0; j < space.nodes(); ++j) rate = std::max(rate, st.lower[j] + st.upper[j]);
    return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

std::vector<double> pde_step(std::span<const double> v_next, std::size_t mode, double t,
                             const SwitchingProblem& p, const SpaceGrid& space, double dt,
                             Scheme scheme) {
    if (v_next.size() != space.nodes()) throw InvalidInput("slice does not match the space grid");
    if (mode >= p.mode_count()) throw InvalidInput("mode out of range");
    if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
    const auto st = generator_stencil(p, space, t);
    const auto n = space.nodes();
    const auto& psi = p.payoff(mode);

    if (scheme == Scheme::explicit_euler) {
        double rate = 0.0;
        for (std::size_t j = 0; j < n; ++j) rate = std::max(rate, st.lower[j] + st.upper[j]);
        if (dt * rate > 1.0) {
            std::ostringstream os;
            os.precision(6);
            os << "explicit step dt=" << dt << " violates the stability limit dt <= " << 1.0 / rate;
            throw CflViolation(os.str(), 1.0 / rate);
        }
        std::vector<double> out(n);
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = v_next[j] + dt * (apply_generator(st, v_next, j) + psi(t, space.state(j)));
        }
        return out;
    }

    std::vector<double> rhs(n);
    for (std::size_t j = 0; j < n; ++j) rhs[j] = v_next[j] + dt * psi(t, space.state(j));
    return solve_tridiagonal(st, dt, std::move(rhs));
}

std::vector<std::vector<double>>
obstacle_project_once(const std::vector<std::vector<double>>& slices, double t,
                      const SwitchingProblem& p, const SpaceGrid& space) {
    if (slices.size() != p.mode_count()) throw InvalidInput("need one slice per mode");
    for (const auto& s : slices) {
        if (s.size() != space.nodes()) throw InvalidInput("slice does not match the space grid");
    }
    std::vector<std::vector<double>> out = slices;
    for (std::size_t i = 0; i < p.mode_count(); ++i) {
        const auto obstacle = obstacle_for(slices, i, t, p, space);
        for (std::size_t n = 0; n < space.nodes(); ++n) out[i][n] = std::max(out[i][n], obstacle[n]);
    }
    return out;
}

std::vector<std::vector<double>> obstacle_project(const std::vector<std::vector<double>>& slices,
                                                  double t, const SwitchingProblem& p,
                                                  const SpaceGrid& space) {
    auto current = obstacle_project_once(slices, t, p, space);
    for (std::size_t sweep = 0; sweep < p.mode_count(); ++sweep) {
        auto next = obstacle_project_once(current, t, p, space);
        if (next == current) return current;
        current = std::move(next);
    }
    throw InternalError("obstacle projection did not settle; switching loops are free");
}

ResidualReport residual_report(const ValueSurface& surface, const SwitchingProblem& p) {
    const auto& grids = surface.grids();
    const auto& space = grids.space;
    const double dt = grids.time.dt();
    ResidualReport report;

    for (std::size_t k = 0; k <= grids.time.steps(); ++k) {
        const double t = grids.time.time(k);
        const auto values = slices_at(surface, k);
        const bool has_next = k < grids.time.steps();
        // Implicit residuals use the operator at t_k on v(t_k); explicit ones on v(t_{k+1}).
        const auto st = generator_stencil(p, space, t);
        for (std::size_t i = 0; i < surface.modes(); ++i) {
            const auto obstacle = obstacle_for(values, i, t, p, space);
            const auto v = surface.slice(i, k);
            for (std::size_t j = 0; j < space.nodes(); ++j) {
                report.max_obstacle_violation =
                    std::max(report.max_obstacle_violation, obstacle[j] - v[j]);
            }
            if (!has_next) continue;
            const auto next = surface.slice(i, k + 1);
            for (std::size_t j = 1; j + 1 < space.nodes(); ++j) {
                const double gen = surface.scheme() == Scheme::implicit_euler
                                       ? apply_generator(st, v, j)
                                       : apply_generator(st, next, j);
                const double residual =
                    v[j] - next[j] - dt * (gen + p.payoff(i)(t, space.state(j)));
                report.max_pde_residual = std::max(report.max_pde_residual, -residual);
                report.complementarity_defect = std::max(
                    report.complementarity_defect, std::abs(std::min(v[j] - obstacle[j], residual)));
            }
        }
    }
    report.max_obstacle_violation = std::max(report.max_obstacle_violation, 0.0);
    return report;
}

SolveResult solve_system(const SwitchingProblem& p, const Grids& grids, Scheme scheme) {
    check_grid_matches(p, grids);
    require_solvable(validate_problem(p, grids.space.x_min(), grids.space.x_max()));

    const auto m = p.mode_count();
    ValueSurface surface(m, grids, scheme);
    const double dt = grids.time.dt();
    for (std::size_t k = grids.time.steps(); k-- > 0;) {
        const double t = grids.time.time(k);
        std::vector<std::vector<double>> cont(m);
        for (std::size_t i = 0; i < m; ++i) {
            cont[i] = pde_step(surface.slice(i, k + 1), i, t, p, grids.space, dt, scheme);
        }
        const auto projected = obstacle_project(cont, t, p, grids.space);
        for (std::size_t i = 0; i < m; ++i) {
            std::copy(projected[i].begin(), projected[i].end(), surface.slice(i, k).begin());
        }
    }
    auto residuals = residual_report(surface, p);
    return {std::move(surface), residuals};
}

ValueSurface solve_linear(const SwitchingProblem& p, const Grids& grids, Scheme scheme) {
    check_grid_matches(p, grids);
    ValueSurface surface(p.mode_count(), grids, scheme);
    const double dt = grids.time.dt();
    for (std::size_t k = grids.time.steps(); k-- > 0;) {
        const double t = grids.time.time(k);
        for (std::size_t i = 0; i < p.mode_count(); ++i) {
            const auto c = pde_step(surface.slice(i, k + 1), i, t, p, grids.space, dt, scheme);
            std::copy(c.begin(), c.end(), surface.slice(i, k).begin());
        }
    }
    return surface;
}

PicardResult picard_solve(const SwitchingProblem& p, const Grids& grids, Scheme scheme,
                          const PicardOptions& options) {
    check_grid_matches(p, grids);
    require_solvable(validate_problem(p, grids.space.x_min(), grids.space.x_max()));
    if (options.max_iters < 1) throw InvalidInput("picard needs max_iters >= 1");

    const auto m = p.mode_count();
    const double dt = grids.time.dt();
    PicardResult result;
    ValueSurface previous = solve_linear(p, grids, scheme);
    result.iterates.push_back(previous);

    for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
        ValueSurface current(m, grids, scheme);
        for (std::size_t k = grids.time.steps(); k-- > 0;) {
            const double t = grids.time.time(k);
            const auto before = slices_at(previous, k);
            for (std::size_t i = 0; i < m; ++i) {
                auto c = pde_step(current.slice(i, k + 1), i, t, p, grids.space, dt, scheme);
                const auto obstacle = obstacle_for(before, i, t, p, grids.space);
                auto out = current.slice(i, k);
                for (std::size_t j = 0; j < c.size(); ++j) out[j] = std::max(c[j], obstacle[j]);
            }
        }

        double gap = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = 0; k <= grids.time.steps(); ++k) {
                const auto now = current.slice(i, k);
                const auto was = previous.slice(i, k);
                for (std::size_t j = 0; j < now.size(); ++j) {
                    const double change = now[j] - was[j];
                    if (change < -options.monotonicity_tol) {
                        std::ostringstream os;
                        os.precision(17);
                        os << "picard iterate " << iter << " decreased by " << -change
                           << " at mode " << i + 1 << ", t=" << grids.time.time(k)
                           << ", x=" << grids.space.state(j);
                        throw InternalError(os.str());
                    }
                    gap = std::max(gap, std::abs(change));
                }
            }
        }
        result.gaps.push_back(gap);
        result.iterations = iter;
        if (options.keep_all) {
            result.iterates.push_back(current);
        } else if (result.iterates.size() > 1) {
            result.iterates.back() = current;
        } else {
            result.iterates.push_back(current);
        }
        previous = std::move(current);
        if (gap < options.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

void write_surface_csv(std::ostream& out, const ValueSurface& surface, std::size_t mode) {
    if (mode >= surface.modes()) throw InvalidInput("mode out of range");
    const auto old_precision = out.precision(17);
    const auto& grids = surface.grids();
    out << "mode,t,x,value\n";
    for (std::size_t k = 0; k <= grids.time.steps(); ++k) {
        const auto v = surface.slice(mode, k);
        for (std::size_t j = 0; j < grids.space.nodes(); ++j) {
            out << mode + 1 << ',' << grids.time.time(k) << ',' << grids.space.state(j) << ','
                << v[j] << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace switchflow
