#pragma once

#include "switchflow/model.hpp"

#include <cmath>
#include <vector>

namespace fixtures {

using switchflow::CoefficientFunction;
using switchflow::SwitchingProblem;

inline CoefficientFunction constant(double c) { return CoefficientFunction::constant(c); }

inline std::vector<std::vector<CoefficientFunction>> cost_matrix(std::size_t m) {
    return std::vector<std::vector<CoefficientFunction>>(m, std::vector<CoefficientFunction>(m));
}

/// Two modes of Example 1: b = x, sigma = sqrt(2) x, T = 1.
inline SwitchingProblem example1(double loop_floor = 0.25) {
    auto g = cost_matrix(2);
    g[1][0] = CoefficientFunction(0.0, 0.1, 0.5, 2.0);
    return {{CoefficientFunction(1.0, 0.0, 0.75, 1.0), CoefficientFunction(0.1, 0.0, 1.0, -1.0)},
            g,
            CoefficientFunction(1.0, 0.0, 0.0, 0.0),
            CoefficientFunction(std::sqrt(2.0), 0.0, 0.0, 0.0),
            1.0,
            loop_floor};
}

/// Three modes of Example 2.
inline SwitchingProblem example2(double loop_floor = 0.25) {
    auto g = cost_matrix(3);
    g[1][0] = CoefficientFunction(0.0, 1.0, 1.0, 4.0);
    g[2][0] = CoefficientFunction(0.0, 1.0, 1.0, 1.0);
    g[2][1] = CoefficientFunction(0.0, 0.0, 4.0, 0.5);
    return {{CoefficientFunction(1.0, 0.0, 2.0, 1.0), CoefficientFunction(-1.0, 0.0, 1.0, -2.0),
             CoefficientFunction(-1.0, 0.0, 1.0, -2.0)},
            g,
            CoefficientFunction(1.0, 0.0, 0.0, 0.0),
            CoefficientFunction(std::sqrt(2.0), 0.0, 0.0, 0.0),
            1.0,
            loop_floor};
}

/// sigma = b = 0, psi1 = 0, psi2 = 1, g12 = 0.3, g21 = 10, T = 1: switch at once, value 0.7.
inline SwitchingProblem deterministic_switch() {
    auto g = cost_matrix(2);
    g[0][1] = constant(0.3);
    g[1][0] = constant(10.0);
    return {{constant(0.0), constant(1.0)}, g, constant(0.0), constant(0.0), 1.0, 0.5};
}

/// Identical payoffs, strictly positive costs: switching never pays.
inline SwitchingProblem symmetric(double payoff = 1.0, double sigma = 1.0) {
    auto g = cost_matrix(2);
    g[0][1] = constant(0.5);
    g[1][0] = constant(0.5);
    return {{constant(payoff), constant(payoff)}, g, constant(0.0), constant(sigma), 1.0, 0.5};
}

/// Constant-coefficient instance used for PDE/oracle convergence.
inline SwitchingProblem brownian_two_mode() {
    auto g = cost_matrix(2);
    g[0][1] = constant(0.1);
    g[1][0] = constant(0.1);
    return {{CoefficientFunction(1.0, 0.0, 0.0, 0.0), constant(0.2)},
            g,
            constant(0.0),
            constant(1.0),
            1.0,
            0.1};
}

} // namespace fixtures

#include <random>

namespace fixtures {

/// Random instance with affine payoffs, dynamics and costs that passes validation
/// on [x_lo, x_hi]; resamples until it does.
inline switchflow::SwitchingProblem random_validated(std::mt19937_64& gen, std::size_t m,
                                                     double x_lo = -10.0, double x_hi = 10.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto sym = [&](double scale) { return scale * (2.0 * u(gen) - 1.0); };
    for (;;) {
        std::vector<CoefficientFunction> psi;
        for (std::size_t i = 0; i < m; ++i) {
            psi.emplace_back(sym(1.0), sym(0.5), sym(1.0), sym(1.0));
        }
        auto g = cost_matrix(m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (i != j) g[i][j] = CoefficientFunction(0.0, 0.1 * u(gen), 0.2 * u(gen), 0.3 + 0.5 * u(gen));
        SwitchingProblem p(std::move(psi), std::move(g), CoefficientFunction(sym(0.3), 0.0, 0.0, sym(0.2)),
                           CoefficientFunction(0.0, 0.2 * u(gen), 0.0, 0.3 + 0.5 * u(gen)), 0.5 + u(gen),
                           0.2);
        if (switchflow::validate_problem(p, x_lo, x_hi).passed) return p;
    }
}

} // namespace fixtures
