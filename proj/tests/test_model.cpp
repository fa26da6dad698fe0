#include "doctest.h"
#include "fixtures.hpp"

#include "switchflow/errors.hpp"
#include "switchflow/model.hpp"

#include <cmath>
#include <random>

using namespace switchflow;
using fixtures::constant;
using fixtures::cost_matrix;

TEST_CASE("eval_coef matches the affine formula") {
    const CoefficientFunction g21(0.0, 0.1, 0.5, 2.0);
    CHECK(eval_coef(g21, 1.0, 2.0) == doctest::Approx(2.7).epsilon(1e-15));
    CHECK(eval_coef(g21, 1.0, -2.0) == doctest::Approx(2.7).epsilon(1e-15));
    CHECK(eval_coef(CoefficientFunction{}, 0.3, -7.0) == 0.0);

    const CoefficientFunction psi1(1.0, 0.0, 2.0, 1.0);
    CHECK(eval_coef(psi1, 0.0, 0.0) == 1.0);

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int n = 0; n < 200; ++n) {
        const double a = u(gen), b = u(gen), c = u(gen), d = u(gen), t = u(gen), x = u(gen);
        CHECK(eval_coef(CoefficientFunction(a, b, c, d), t, x) ==
              a * x + b * std::abs(x) + c * t + d);
    }
}

TEST_CASE("coefficient functions reject non-finite coefficients") {
    CHECK_THROWS_AS(CoefficientFunction(NAN, 0, 0, 0), InvalidInput);
    CHECK_THROWS_AS(CoefficientFunction(0, 0, INFINITY, 0), InvalidInput);
}

TEST_CASE("opaque coefficients evaluate and shift") {
    auto f = CoefficientFunction::opaque([](double t, double x) { return t * x; }, "tx");
    CHECK_FALSE(f.is_affine());
    CHECK(f(2.0, 3.0) == 6.0);
    CHECK(f.shifted(1.0)(2.0, 3.0) == 7.0);
    CHECK_THROWS_AS(f.affine(), InvalidInput);
}

TEST_CASE("problem construction enforces structural invariants") {
    auto g = cost_matrix(2);
    std::vector<CoefficientFunction> psi{constant(1), constant(2)};
    CHECK_NOTHROW(SwitchingProblem(psi, g, constant(0), constant(1), 1.0));
    CHECK_THROWS_AS(SwitchingProblem({constant(1)}, cost_matrix(1), constant(0), constant(1), 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(SwitchingProblem(psi, g, constant(0), constant(1), 0.0), InvalidInput);
    CHECK_THROWS_AS(SwitchingProblem(psi, g, constant(0), constant(1), 1.0, 0.0), InvalidInput);
    auto bad_diag = g;
    bad_diag[1][1] = constant(0.1);
    CHECK_THROWS_AS(SwitchingProblem(psi, bad_diag, constant(0), constant(1), 1.0), InvalidInput);
    CHECK(SwitchingProblem(psi, g, constant(0), constant(1), 1.0).loop_floor() == kDefaultLoopFloor);
}

TEST_CASE("Example 1 costs pass validation") {
    const auto report = validate_problem(fixtures::example1(1.0), -5.0, 5.0);
    CHECK(report.passed);
    CHECK(report.certified);
    CHECK(report.violations.empty());
}

TEST_CASE("zero loop costs violate the loop floor with margin -alpha") {
    auto p = fixtures::example1(1.0).with_costs(cost_matrix(2));
    const auto report = validate_problem(p, -5.0, 5.0);
    REQUIRE_FALSE(report.passed);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].rule == Rule::loop_floor);
    CHECK(report.violations[0].margin == -1.0);
}

TEST_CASE("three modes with a free two-step chain violate the strict triangle") {
    auto g = cost_matrix(3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) g[i][j] = constant(1.0);
    g[0][1] = constant(0.0);
    g[1][2] = constant(0.0);
    const SwitchingProblem p({constant(0), constant(0), constant(0)}, g, constant(0), constant(1),
                             1.0, 0.5);
    const auto report = validate_problem(p, -1.0, 1.0);
    REQUIRE_FALSE(report.passed);
    CHECK(report.violates(Rule::strict_triangle));
    bool found = false;
    for (const auto& v : report.violations) {
        if (v.rule == Rule::strict_triangle && v.modes == std::vector<std::size_t>{0, 1, 2}) {
            found = true;
            CHECK(v.margin == -1.0);
        }
    }
    CHECK(found);
}

TEST_CASE("negative costs are reported at the worst corner") {
    auto g = cost_matrix(2);
    g[0][1] = CoefficientFunction(1.0, 0.0, 0.0, 0.0); // g12 = x, negative for x < 0
    g[1][0] = constant(5.0);
    const SwitchingProblem p({constant(0), constant(0)}, g, constant(0), constant(1), 1.0, 0.5);
    const auto report = validate_problem(p, -3.0, 2.0);
    REQUIRE(report.violates(Rule::nonnegative_cost));
    for (const auto& v : report.violations) {
        if (v.rule == Rule::nonnegative_cost) {
            CHECK(v.x == -3.0);
            CHECK(v.margin == -3.0);
        }
    }
    CHECK_FALSE(report.violates(Rule::loop_floor)); // 5 - 3 > 0.5 at the worst corner
}

TEST_CASE("abs terms are checked at x = 0") {
    // g12 + g21 = |x| + 0.2 dips to 0.2 at x = 0, below alpha = 0.5.
    auto g = cost_matrix(2);
    g[0][1] = CoefficientFunction(0.0, 1.0, 0.0, 0.1);
    g[1][0] = constant(0.1);
    const SwitchingProblem p({constant(0), constant(0)}, g, constant(0), constant(1), 1.0, 0.5);
    const auto report = validate_problem(p, -4.0, 4.0);
    REQUIRE(report.violates(Rule::loop_floor));
    CHECK(report.violations[0].x == 0.0);
}

TEST_CASE("Example 2 breaks the strict triangle inequality as published") {
    const auto report = validate_problem(fixtures::example2(), 0.01, 100.0);
    CHECK_FALSE(report.passed);
    CHECK(report.violates(Rule::strict_triangle));
    CHECK_FALSE(report.violates(Rule::loop_floor));
    CHECK_FALSE(report.violates(Rule::nonnegative_cost));
    CHECK_NOTHROW(require_solvable(report));
    CHECK_THROWS_AS(require_valid(report), InvalidInput);
}

TEST_CASE("validation rejects malformed domains") {
    CHECK_THROWS_AS(validate_problem(fixtures::example1(), 1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(validate_problem(fixtures::example1(), 2.0, -1.0), InvalidInput);
}

TEST_CASE("opaque costs fall back to sampled validation") {
    auto g = cost_matrix(2);
    g[0][1] = CoefficientFunction::opaque([](double, double x) { return x * x; }, "x^2");
    g[1][0] = constant(0.1);
    const SwitchingProblem p({constant(0), constant(0)}, g, constant(0), constant(1), 1.0, 0.2);
    const auto report = validate_problem(p, -1.0, 1.0);
    CHECK_FALSE(report.certified);
    // x^2 + 0.1 <= 0.2 near x = 0 only, which the 101-node grid samples exactly.
    CHECK(report.violates(Rule::loop_floor));

    ValidationOptions loose;
    loose.strict_slack = -1.0;
    CHECK(validate_problem(p, -1.0, 1.0, loose).passed);
}

TEST_CASE("validation is deterministic") {
    const auto a = validate_problem(fixtures::example2(), 0.01, 100.0);
    const auto b = validate_problem(fixtures::example2(), 0.01, 100.0);
    CHECK(a.summary() == b.summary());
}

TEST_CASE("validated problems never favour a two-switch chain on grid nodes") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 200 && checked < 20; ++trial) {
        auto g = cost_matrix(3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                if (i != j) g[i][j] = CoefficientFunction(0.0, u(gen), u(gen), 0.5 + u(gen));
        const SwitchingProblem p({constant(0), constant(0), constant(0)}, g, constant(0), constant(1),
                                 1.0, 0.1);
        if (!validate_problem(p, -2.0, 2.0).passed) continue;
        ++checked;
        for (int a = 0; a <= 20; ++a) {
            for (int b = 0; b <= 40; ++b) {
                const double t = a / 20.0, x = -2.0 + b / 10.0;
                for (std::size_t i = 0; i < 3; ++i)
                    for (std::size_t j = 0; j < 3; ++j)
                        for (std::size_t k = 0; k < 3; ++k) {
                            if (i == j || j == k || i == k) continue;
                            CHECK(p.cost(i, j)(t, x) + p.cost(j, k)(t, x) > p.cost(i, k)(t, x));
                        }
            }
        }
    }
    CHECK(checked == 20);
}
