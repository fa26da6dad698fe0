#include "switchflow/model.hpp"

#include "switchflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace switchflow {

SwitchingProblem::SwitchingProblem(std::vector<CoefficientFunction> payoffs,
                                   std::vector<std::vector<CoefficientFunction>> costs,
                                   CoefficientFunction drift, CoefficientFunction volatility,
                                   double horizon, double loop_floor)
    : payoffs_(std::move(payoffs)),
      costs_(std::move(costs)),
      drift_(std::move(drift)),
      volatility_(std::move(volatility)),
      horizon_(horizon),
      loop_floor_(loop_floor) {
    const auto m = payoffs_.size();
    if (m < 2) throw InvalidInput("switching problem needs at least 2 modes");
    if (costs_.size() != m) throw InvalidInput("cost matrix must have one row per mode");
    for (std::size_t i = 0; i < m; ++i) {
        if (costs_[i].size() != m) throw InvalidInput("cost matrix must be square");
        if (!costs_[i][i].is_zero()) {
            throw InvalidInput("diagonal cost g" + std::to_string(i + 1) + std::to_string(i + 1) +
                               " must be identically zero");
        }
    }
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw InvalidInput("horizon must be > 0");
    if (!(loop_floor_ > 0.0) || !std::isfinite(loop_floor_)) {
        throw InvalidInput("loop floor must be > 0");
    }
}

SwitchingProblem SwitchingProblem::with_payoffs(std::vector<CoefficientFunction> payoffs) const {
    return {std::move(payoffs), costs_, drift_, volatility_, horizon_, loop_floor_};
}

SwitchingProblem
SwitchingProblem::with_costs(std::vector<std::vector<CoefficientFunction>> costs) const {
    return {payoffs_, std::move(costs), drift_, volatility_, horizon_, loop_floor_};
}

bool SwitchingProblem::has_multiplicative_dynamics() const noexcept {
    return drift_.is_pure_multiple_of_x() && volatility_.is_pure_multiple_of_x() &&
           !volatility_.is_zero();
}

std::string_view rule_id(Rule rule) noexcept {
    switch (rule) {
    case Rule::zero_diagonal: return "zero-diagonal";
    case Rule::nonnegative_cost: return "nonnegative-cost";
    case Rule::strict_triangle: return "strict-triangle";
    case Rule::loop_floor: return "loop-floor";
    }
    return "unknown";
}

bool ValidationReport::violates(Rule rule) const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [rule](const Violation& v) { return v.rule == rule; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os.precision(17);
    os << (passed ? "passed" : "failed") << (certified ? "" : " (sampled, not certified)");
    for (const auto& v : violations) {
        os << "\n  " << rule_id(v.rule) << " modes";
        for (auto i : v.modes) os << ' ' << i + 1;
        os << " at (t=" << v.t << ", x=" << v.x << ") margin " << v.margin;
    }
    return os.str();
}

namespace {

struct SamplePoint {
    double t;
    double x;
};

std::vector<SamplePoint> sample_points(double horizon, double x_min, double x_max, bool certified,
                                       std::size_t nodes) {
    std::vector<SamplePoint> pts;
    if (certified) {
        std::vector<double> xs{x_min, x_max};
        if (x_min < 0.0 && 0.0 < x_max) xs.insert(xs.begin() + 1, 0.0);
        for (double t : {0.0, horizon})
            for (double x : xs) pts.push_back({t, x});
        return pts;
    }
    nodes = std::max<std::size_t>(nodes, 2);
    for (std::size_t a = 0; a < nodes; ++a) {
        const double t = horizon * static_cast<double>(a) / static_cast<double>(nodes - 1);
        for (std::size_t b = 0; b < nodes; ++b) {
            const double x =
                x_min + (x_max - x_min) * static_cast<double>(b) / static_cast<double>(nodes - 1);
            pts.push_back({t, x});
        }
    }
    return pts;
}

// Keeps the worst sample per (rule, modes) so the report stays small and ordered.
class ViolationCollector {
public:
    void record(Rule rule, std::vector<std::size_t> modes, SamplePoint at, double margin) {
        auto key = std::make_tuple(static_cast<int>(rule), modes);
        auto it = worst_.find(key);
        if (it == worst_.end() || margin < it->second.margin) {
            worst_[key] = Violation{rule, std::move(modes), at.t, at.x, margin};
        }
    }

    std::vector<Violation> take() {
        std::vector<Violation> out;
        for (auto& [key, v] : worst_) out.push_back(std::move(v));
        return out;
    }

private:
    std::map<std::tuple<int, std::vector<std::size_t>>, Violation> worst_;
};

} // namespace

ValidationReport validate_problem(const SwitchingProblem& p, double x_min, double x_max,
                                  const ValidationOptions& options) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
        throw InvalidInput("validation domain needs finite x_min < x_max");
    }
    const auto m = p.mode_count();
    bool certified = true;
    for (const auto& row : p.costs())
        for (const auto& g : row) certified = certified && g.is_affine();

    const double slack = certified ? 0.0 : options.strict_slack;
    const auto pts = sample_points(p.horizon(), x_min, x_max, certified, options.sample_nodes);
    ViolationCollector found;

    for (std::size_t i = 0; i < m; ++i) {
        if (!p.cost(i, i).is_zero()) found.record(Rule::zero_diagonal, {i, i}, {0.0, x_min}, 0.0);
    }
    for (const auto& pt : pts) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                const double gij = p.cost(i, j)(pt.t, pt.x);
                if (gij < 0.0) found.record(Rule::nonnegative_cost, {i, j}, pt, gij);
                if (i < j) {
                    const double loop = gij + p.cost(j, i)(pt.t, pt.x) - p.loop_floor();
                    if (!(loop > slack)) found.record(Rule::loop_floor, {i, j}, pt, loop);
                }
                for (std::size_t k = 0; k < m; ++k) {
                    if (k == i || k == j) continue;
                    const double tri = gij + p.cost(j, k)(pt.t, pt.x) - p.cost(i, k)(pt.t, pt.x);
                    if (!(tri > slack)) found.record(Rule::strict_triangle, {i, j, k}, pt, tri);
                }
            }
        }
    }

    ValidationReport report;
    report.certified = certified;
    report.violations = found.take();
    report.passed = report.violations.empty();
    return report;
}

void require_valid(const ValidationReport& report) {
    if (!report.passed) throw InvalidInput("problem failed validation: " + report.summary());
}

void require_solvable(const ValidationReport& report) {
    for (const auto& v : report.violations) {
        if (v.rule != Rule::strict_triangle) {
            throw InvalidInput("problem failed validation: " + report.summary());
        }
    }
}

} // namespace switchflow
