#pragma once

#include <vector>

#include "fairaudit/distribution.hpp"

namespace fairaudit {

// Real-valued function tabulated on an ordered support. Home of the
// perturbation directions f, the log-likelihood ratios f_l/g_l, the
// principal functions f_m/g_m and the correction function itself.
class ScoreFunction {
public:
    ScoreFunction(SupportPtr support, std::vector<double> values);

    const SupportPtr& support() const noexcept { return support_; }
    std::size_t size() const noexcept { return values_.size(); }
    double value(std::size_t i) const { return values_.at(i); }
    const std::vector<double>& values() const noexcept { return values_; }

    static ScoreFunction zero(const SupportPtr& support);

private:
    SupportPtr support_;
    std::vector<double> values_;
};

// Trade-off weights of the four divergence terms, all nonnegative.
struct LambdaWeights {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    double l4 = 0.0;

    LambdaWeights() = default;
    LambdaWeights(double a, double b, double c, double d);
};

// sum_x p(x) f(x)
double expectation(const DiscreteDistribution& p, const ScoreFunction& f);

}  // namespace fairaudit
