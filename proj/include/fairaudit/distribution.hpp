#pragma once

#include <span>
#include <vector>

#include "fairaudit/support.hpp"

namespace fairaudit {

// Probability mass function over an explicit finite support. Immutable;
// masses are nonnegative and sum to 1 within 1e-12.
class DiscreteDistribution {
public:
    DiscreteDistribution(SupportPtr support, std::vector<double> mass);

    const SupportPtr& support() const noexcept { return support_; }
    std::size_t size() const noexcept { return mass_.size(); }
    double mass(std::size_t i) const { return mass_.at(i); }
    const std::vector<double>& masses() const noexcept { return mass_; }

private:
    SupportPtr support_;
    std::vector<double> mass_;
};

// Normalizes nonnegative weights into a distribution. Support order follows
// the input order.
DiscreteDistribution make_distribution(std::vector<std::string> labels,
                                       std::span<const double> weights);
DiscreteDistribution make_distribution(SupportPtr support, std::span<const double> weights);

// Braced-list conveniences (std::span cannot bind an initializer list).
inline DiscreteDistribution make_distribution(std::vector<std::string> labels,
                                              std::initializer_list<double> weights) {
    return make_distribution(std::move(labels),
                             std::span<const double>(weights.begin(), weights.size()));
}
inline DiscreteDistribution make_distribution(SupportPtr support,
                                              std::initializer_list<double> weights) {
    return make_distribution(std::move(support),
                             std::span<const double>(weights.begin(), weights.size()));
}

}  // namespace fairaudit
