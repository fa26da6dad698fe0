#include "doctest.h"
#include "fixtures.hpp"

#include "switchflow/errors.hpp"
#include "switchflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace switchflow;
using fixtures::constant;
using fixtures::cost_matrix;

namespace {

SwitchingProblem heat(CoefficientFunction psi, double sigma = 1.0) {
    auto g = cost_matrix(2);
    g[0][1] = constant(1);
    g[1][0] = constant(1);
    return {{psi, psi}, g, constant(0), constant(sigma), 1.0, 0.5};
}

std::vector<double> sampled(const SpaceGrid& s, double (*f)(double)) {
    std::vector<double> v(s.nodes());
    for (std::size_t j = 0; j < s.nodes(); ++j) v[j] = f(s.state(j));
    return v;
}

// Three modes where g12 + g23 < g13, so one projection sweep is not enough.
SwitchingProblem broken_triangle() {
    auto g = cost_matrix(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) g[i][j] = constant(1);
    g[0][2] = constant(5);
    return {{constant(0), constant(0), constant(0)}, g, constant(0), constant(0), 1.0, 0.5};
}

void check_obstacle(const ValueSurface& s, const SwitchingProblem& p) {
    const auto& g = s.grids();
    for (std::size_t k = 0; k <= g.time.steps(); ++k)
        for (std::size_t j = 0; j < g.space.nodes(); ++j)
            for (std::size_t i = 0; i < p.mode_count(); ++i)
                for (std::size_t l = 0; l < p.mode_count(); ++l)
                    if (l != i)
                        CHECK(s.at(i, k, j) >= s.at(l, k, j) -
                                                   p.cost(i, l)(g.time.time(k), g.space.state(j)) -
                                                   kObstacleTolerance);
}

} // namespace

TEST_CASE("space grid coordinates") {
    const SpaceGrid lin(-1, 1, 5);
    CHECK(lin.spacing() == 0.5);
    CHECK(lin.state(3) == 0.5);
    CHECK(lin.nearest(0.3) == 3);
    CHECK(lin.nearest(-9) == 0);
    const std::vector<double> v{0, 1, 2, 3, 4};
    CHECK(lin.interpolate(v, 0.25) == doctest::Approx(2.5));
    CHECK(lin.interpolate(v, 7) == 4);

    const SpaceGrid lg(1, 100, 3, true);
    CHECK(lg.state(1) == doctest::Approx(10));
    CHECK(lg.state(2) == 100);
    CHECK_THROWS_AS(SpaceGrid(0, 1, 5, true), InvalidInput);
    CHECK_THROWS_AS(SpaceGrid(1, 0, 5), InvalidInput);
    CHECK_THROWS_AS(SpaceGrid(0, 1, 2), InvalidInput);
}

TEST_CASE("a step from zero with unit payoff gives dt") {
    const auto p = heat(constant(1));
    const SpaceGrid s(-2, 2, 21);
    const std::vector<double> zero(21, 0.0);
    for (auto scheme : {Scheme::explicit_euler, Scheme::implicit_euler}) {
        const auto c = pde_step(zero, 0, 0.0, p, s, 0.001, scheme);
        for (double v : c) CHECK(v == doctest::Approx(0.001).epsilon(1e-12));
    }
}

TEST_CASE("linear data is invariant without drift") {
    const auto p = heat(constant(0));
    const SpaceGrid s(-2, 2, 21);
    const auto v = sampled(s, [](double x) { return 3 * x - 1; });
    for (auto scheme : {Scheme::explicit_euler, Scheme::implicit_euler}) {
        const auto c = pde_step(v, 0, 0.0, p, s, 0.005, scheme);
        for (std::size_t j = 0; j < v.size(); ++j) CHECK(c[j] == doctest::Approx(v[j]).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("the centred second difference is exact on a parabola") {
    // A x^2 = sigma^2 / 2 * 2 = 1 at interior nodes.
    const auto p = heat(constant(0));
    const SpaceGrid s(-2, 2, 21);
    const auto v = sampled(s, [](double x) { return x * x; });
    const auto c = pde_step(v, 0, 0.0, p, s, 0.005, Scheme::explicit_euler);
    for (std::size_t j = 1; j + 1 < v.size(); ++j) CHECK(c[j] == doctest::Approx(v[j] + 0.005).epsilon(1e-12));
}

TEST_CASE("explicit steps above the stability limit are rejected") {
    const auto p = heat(constant(0), 2.0);
    const SpaceGrid s(-2, 2, 41);
    const double limit = explicit_step_limit(p, s, 0.0);
    CHECK(limit == doctest::Approx(0.1 * 0.1 / 4.0));
    const std::vector<double> zero(41, 0.0);
    try {
        pde_step(zero, 0, 0.0, p, s, 2 * limit, Scheme::explicit_euler);
        FAIL("expected a CFL violation");
    } catch (const CflViolation& e) {
        CHECK(e.limiting_dt() == doctest::Approx(limit));
    }
    CHECK_NOTHROW(pde_step(zero, 0, 0.0, p, s, 2 * limit, Scheme::implicit_euler));
}

TEST_CASE("projection lifts a dominated mode") {
    auto p = heat(constant(0));
    auto g = p.costs();
    g[0][1] = constant(0.5);
    g[1][0] = constant(0.5);
    p = p.with_costs(g);
    const SpaceGrid s(-1, 1, 3);
    const std::vector<std::vector<double>> c{{1, 1, 1}, {3, 0, 1.2}};
    const auto v = obstacle_project(c, 0.0, p, s);
    CHECK(v[0] == std::vector<double>{2.5, 1, 1});
    CHECK(v[1] == std::vector<double>{3, 0.5, 1.2});
}

TEST_CASE("a broken triangle needs more than one sweep") {
    const auto p = broken_triangle();
    const SpaceGrid s(-1, 1, 3);
    const std::vector<std::vector<double>> c{{0, 0, 0}, {0, 0, 0}, {10, 10, 10}};
    const auto once = obstacle_project_once(c, 0.0, p, s);
    CHECK(once[0][1] == 5);
    CHECK(once[1][1] == 9);
    // After one sweep mode 1 is still below v_2 - g12 = 8.
    CHECK(once[0][1] < once[1][1] - 1);
    const auto full = obstacle_project(c, 0.0, p, s);
    CHECK(full[0][1] == 8);
    CHECK(full[1][1] == 9);
    CHECK(full[2][1] == 10);
}

TEST_CASE("identical payoffs solve to the remaining horizon") {
    const auto p = fixtures::symmetric(1.0, 1.0);
    const Grids grids{TimeGrid::over(p, 20), SpaceGrid(-3, 3, 31)};
    const auto r = solve_system(p, grids, Scheme::implicit_euler);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k <= 20; ++k)
            for (std::size_t j = 0; j < 31; ++j)
                CHECK(r.surface.at(i, k, j) == doctest::Approx(1.0 - grids.time.time(k)).epsilon(1e-12));
}

TEST_CASE("deterministic instance solves to 0.7") {
    const auto p = fixtures::deterministic_switch();
    const Grids grids{TimeGrid::over(p, 10), SpaceGrid(-1, 1, 5)};
    for (auto scheme : {Scheme::explicit_euler, Scheme::implicit_euler}) {
        const auto r = solve_system(p, grids, scheme);
        CHECK(std::abs(r.surface.at(0, 0, 2) - 0.7) <= 1e-12);
        CHECK(std::abs(r.surface.at(1, 0, 2) - 1.0) <= 1e-12);
        const auto pic = picard_solve(p, grids, scheme);
        CHECK(pic.converged);
        CHECK(std::abs(pic.final_surface().at(0, 0, 2) - 0.7) <= 1e-12);
    }
}

TEST_CASE("solved surfaces respect the obstacles and the payoff bound") {
    const auto p = fixtures::brownian_two_mode();
    const Grids grids{TimeGrid::over(p, 40), SpaceGrid(-4, 4, 81)};
    const auto r = solve_system(p, grids, Scheme::implicit_euler);
    check_obstacle(r.surface, p);
    CHECK(r.residuals.max_obstacle_violation <= kObstacleTolerance);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k <= 40; ++k) {
            const double bound = (p.horizon() - grids.time.time(k)) * 4.0;
            for (std::size_t j = 0; j < 81; ++j) CHECK(std::abs(r.surface.at(i, k, j)) <= bound + 1e-12);
        }
}

TEST_CASE("shifting every payoff adds c (T - t)") {
    const auto p = fixtures::brownian_two_mode();
    const Grids grids{TimeGrid::over(p, 20), SpaceGrid(-3, 3, 41)};
    std::vector<CoefficientFunction> psi;
    for (const auto& f : p.payoffs()) psi.push_back(f.shifted(0.75));
    const auto base = solve_system(p, grids, Scheme::implicit_euler).surface;
    const auto up = solve_system(p.with_payoffs(psi), grids, Scheme::implicit_euler).surface;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t k = 0; k <= 20; ++k)
            for (std::size_t j = 0; j < 41; ++j)
                CHECK(up.at(i, k, j) - base.at(i, k, j) ==
                      doctest::Approx(0.75 * (1.0 - grids.time.time(k))).epsilon(1e-9));
}

TEST_CASE("relabelling modes permutes the solution") {
    const auto p = fixtures::example2();
    const std::vector<std::size_t> perm{2, 0, 1};
    std::vector<CoefficientFunction> psi(3);
    auto g = cost_matrix(3);
    for (std::size_t i = 0; i < 3; ++i) {
        psi[perm[i]] = p.payoff(i);
        for (std::size_t j = 0; j < 3; ++j) g[perm[i]][perm[j]] = p.cost(i, j);
    }
    const SwitchingProblem q(psi, g, p.drift(), p.volatility(), p.horizon(), p.loop_floor());
    const Grids grids{TimeGrid::over(p, 20), SpaceGrid(0.2, 5, 41, true)};
    const auto a = solve_system(p, grids, Scheme::implicit_euler).surface;
    const auto b = solve_system(q, grids, Scheme::implicit_euler).surface;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k <= 20; ++k)
            for (std::size_t j = 0; j < 41; ++j) CHECK(a.at(i, k, j) == b.at(perm[i], k, j));
}

TEST_CASE("picard iterates rise to the direct solution") {
    const auto p = fixtures::example1();
    const Grids grids{TimeGrid::over(p, 40), SpaceGrid(0.05, 10, 61, true)};
    const auto pic = picard_solve(p, grids, Scheme::implicit_euler);
    REQUIRE(pic.converged);
    for (std::size_t n = 1; n < pic.iterates.size(); ++n) {
        const auto& lo = pic.iterates[n - 1].data();
        const auto& hi = pic.iterates[n].data();
        for (std::size_t e = 0; e < lo.size(); ++e) CHECK(hi[e] >= lo[e] - 1e-10);
    }
    CHECK(pic.gaps.back() < 1e-8);
    const auto direct = solve_system(p, grids, Scheme::implicit_euler).surface;
    CHECK(pic.final_surface().max_difference(direct) <= 1e-6);
    check_obstacle(pic.final_surface(), p);
}

TEST_CASE("explicit and implicit schemes agree on a fine grid") {
    const auto p = fixtures::brownian_two_mode();
    const SpaceGrid s(-4, 4, 81);
    const double limit = explicit_step_limit(p, s, 0.0);
    const auto steps = static_cast<std::size_t>(std::ceil(p.horizon() / limit)) + 1;
    const Grids grids{TimeGrid::over(p, steps), s};
    const auto e = solve_system(p, grids, Scheme::explicit_euler).surface;
    const auto i = solve_system(p, grids, Scheme::implicit_euler).surface;
    CHECK(e.max_difference(i) <= 1e-2);
}

TEST_CASE("solver gate") {
    auto p = fixtures::brownian_two_mode();
    auto g = p.costs();
    g[0][1] = constant(-0.2);
    const Grids grids{TimeGrid::over(p, 10), SpaceGrid(-1, 1, 11)};
    CHECK_THROWS_AS(solve_system(p.with_costs(g), grids, Scheme::implicit_euler), InvalidInput);
    CHECK_THROWS_AS(solve_system(p, Grids{TimeGrid(0, 2, 10), SpaceGrid(-1, 1, 11)}, Scheme::implicit_euler),
                    InvalidInput);
    // A broken triangle is tolerated by the closure projection.
    CHECK_NOTHROW(solve_system(broken_triangle(), grids, Scheme::implicit_euler));
}

TEST_CASE("surface CSV layout") {
    const auto p = fixtures::deterministic_switch();
    const Grids grids{TimeGrid::over(p, 2), SpaceGrid(-1, 1, 3)};
    const auto r = solve_system(p, grids, Scheme::implicit_euler);
    std::ostringstream os;
    write_surface_csv(os, r.surface, 1);
    const auto text = os.str();
    CHECK(text.rfind("mode,t,x,value\n2,0,-1,1\n2,0,0,1\n2,0,1,1\n2,0.5,-1,0.5\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 10);
}
