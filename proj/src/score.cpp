#include "fairaudit/score.hpp"

#include <cmath>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

ScoreFunction::ScoreFunction(SupportPtr support, std::vector<double> values)
    : support_(std::move(support)), values_(std::move(values)) {
    if (!support_ || support_->size() == 0)
        fail(ErrorCode::EmptySupport, "score function needs a nonempty support");
    if (values_.size() != support_->size())
        fail(ErrorCode::SupportMismatch, "score values do not match support size");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i]))
            fail(ErrorCode::InvalidArgument,
                 "non-finite score value at '" + support_->label(i) + "'");
}

ScoreFunction ScoreFunction::zero(const SupportPtr& support) {
    return ScoreFunction(support, std::vector<double>(support->size(), 0.0));
}

LambdaWeights::LambdaWeights(double a, double b, double c, double d)
    : l1(a), l2(b), l3(c), l4(d) {
    if (!(l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0 && l4 >= 0.0))
        fail(ErrorCode::InvalidArgument, "lambda weights must be nonnegative");
}

double expectation(const DiscreteDistribution& p, const ScoreFunction& f) {
    require_aligned(p.support(), f.support(), "expectation");
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s.add(p.mass(i) * f.value(i));
    return s.value();
}

}  // namespace fairaudit
