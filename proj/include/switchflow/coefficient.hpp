#pragma once

#include <functional>
#include <memory>
#include <string>

namespace switchflow {

/// Coefficients of f(t, x) = x_coef * x + abs_x_coef * |x| + t_coef * t + const_term.
struct AffineCoefficients {
    double x_coef = 0.0;
    double abs_x_coef = 0.0;
    double t_coef = 0.0;
    double const_term = 0.0;

    friend bool operator==(const AffineCoefficients&, const AffineCoefficients&) = default;
};

/**
 * A scalar function of (time, state).
 *
 * The affine-plus-absolute-value family is the normal representation: every
 * assumption check on it can be decided exactly at a handful of points. An
 * opaque evaluator may be wrapped instead, at the price of sampled (rather
 * than certified) validation and no log-space detection.
 */
class CoefficientFunction {
public:
    using Evaluator = std::function<double(double t, double x)>;

    /// The zero function.
    CoefficientFunction() = default;

    /// Throws InvalidInput if any coefficient is not finite.
    CoefficientFunction(double x_coef, double abs_x_coef, double t_coef, double const_term);

    explicit CoefficientFunction(const AffineCoefficients& coefs);

    static CoefficientFunction constant(double c);
    static CoefficientFunction opaque(Evaluator f, std::string label = "opaque");

    double operator()(double t, double x) const;

    bool is_affine() const noexcept { return !evaluator_; }
    /// Throws InvalidInput for opaque functions.
    const AffineCoefficients& affine() const;

    bool is_zero() const noexcept;
    /// True when f(t, x) = a * x for some a, i.e. only x_coef is nonzero.
    bool is_pure_multiple_of_x() const noexcept;

    /// f + c; affine functions stay affine.
    CoefficientFunction shifted(double c) const;

    std::string describe() const;

private:
    AffineCoefficients coefs_{};
    std::shared_ptr<const Evaluator> evaluator_;
    std::string label_;
};

/// Evaluates f at (t, x). Exact for the affine family.
double eval_coef(const CoefficientFunction& f, double t, double x);

} // namespace switchflow
