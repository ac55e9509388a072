#include "fairaudit/distribution.hpp"

#include <cmath>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

DiscreteDistribution::DiscreteDistribution(SupportPtr support, std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
    if (!support_ || support_->size() == 0)
        fail(ErrorCode::EmptySupport, "distribution needs a nonempty support");
    if (mass_.size() != support_->size())
        fail(ErrorCode::SupportMismatch, "mass vector length does not match support size");
    KahanSum total;
    for (std::size_t i = 0; i < mass_.size(); ++i) {
        if (!(mass_[i] >= 0.0))
            fail(ErrorCode::NegativeWeight,
                 "negative or non-finite mass at '" + support_->label(i) + "'");
        total.add(mass_[i]);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        fail(ErrorCode::InvalidArgument, "masses sum to " + format_double(total.value()) +
                                             ", expected 1 within 1e-12");
}

DiscreteDistribution make_distribution(SupportPtr support, std::span<const double> weights) {
    if (!support || support->size() == 0 || weights.empty())
        fail(ErrorCode::EmptySupport, "make_distribution: empty support or weights");
    if (weights.size() != support->size())
        fail(ErrorCode::SupportMismatch, "make_distribution: weight count does not match support");
    KahanSum total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            fail(ErrorCode::NegativeWeight,
                 "negative or non-finite weight at '" + support->label(i) + "'");
        total.add(weights[i]);
    }
    const double z = total.value();
    if (z <= 0.0)
        fail(ErrorCode::ZeroTotalMass, "make_distribution: weights sum to zero");
    std::vector<double> mass(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) mass[i] = weights[i] / z;
    return DiscreteDistribution(std::move(support), std::move(mass));
}

DiscreteDistribution make_distribution(std::vector<std::string> labels,
                                       std::span<const double> weights) {
    return make_distribution(make_support(std::move(labels)), weights);
}

}  // namespace fairaudit
