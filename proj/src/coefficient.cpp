#include "switchflow/coefficient.hpp"

#include "switchflow/errors.hpp"

#include <cmath>
#include <sstream>

namespace switchflow {

CoefficientFunction::CoefficientFunction(double x_coef, double abs_x_coef, double t_coef,
                                         double const_term)
    : coefs_{x_coef, abs_x_coef, t_coef, const_term} {
    if (!std::isfinite(x_coef) || !std::isfinite(abs_x_coef) || !std::isfinite(t_coef) ||
        !std::isfinite(const_term)) {
        throw InvalidInput("coefficient function has a non-finite coefficient");
    }
}

CoefficientFunction::CoefficientFunction(const AffineCoefficients& c)
    : CoefficientFunction(c.x_coef, c.abs_x_coef, c.t_coef, c.const_term) {}

CoefficientFunction CoefficientFunction::constant(double c) { return {0.0, 0.0, 0.0, c}; }

CoefficientFunction CoefficientFunction::opaque(Evaluator f, std::string label) {
    if (!f) throw InvalidInput("opaque coefficient function needs a callable");
    CoefficientFunction out;
    out.evaluator_ = std::make_shared<const Evaluator>(std::move(f));
    out.label_ = std::move(label);
    return out;
}

double CoefficientFunction::operator()(double t, double x) const {
    if (evaluator_) return (*evaluator_)(t, x);
    return coefs_.x_coef * x + coefs_.abs_x_coef * std::abs(x) + coefs_.t_coef * t +
           coefs_.const_term;
}

const AffineCoefficients& CoefficientFunction::affine() const {
    if (evaluator_) throw InvalidInput("coefficient function '" + label_ + "' is not affine");
    return coefs_;
}

bool CoefficientFunction::is_zero() const noexcept {
    return !evaluator_ && coefs_ == AffineCoefficients{};
}

bool CoefficientFunction::is_pure_multiple_of_x() const noexcept {
    return !evaluator_ && coefs_.abs_x_coef == 0.0 && coefs_.t_coef == 0.0 &&
           coefs_.const_term == 0.0;
}

CoefficientFunction CoefficientFunction::shifted(double c) const {
    if (!evaluator_) {
        auto out = coefs_;
        out.const_term += c;
        return CoefficientFunction(out);
    }
    auto inner = evaluator_;
    return opaque([inner, c](double t, double x) { return (*inner)(t, x) + c; },
                  label_ + "+const");
}

std::string CoefficientFunction::describe() const {
    if (evaluator_) return label_;
    std::ostringstream os;
    os.precision(17);
    os << coefs_.x_coef << "*x + " << coefs_.abs_x_coef << "*|x| + " << coefs_.t_coef
       << "*t + " << coefs_.const_term;
    return os.str();
}

double eval_coef(const CoefficientFunction& f, double t, double x) { return f(t, x); }

} // namespace switchflow
