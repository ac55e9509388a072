#pragma once

#include <vector>

#include "fairaudit/distribution.hpp"

namespace fairaudit {

// Row-stochastic conditional distribution W(y|x). Row x is a valid
// distribution over the output support.
class Channel {
public:
    Channel(SupportPtr input_support, SupportPtr output_support,
            std::vector<std::vector<double>> rows);

    const SupportPtr& input_support() const noexcept { return in_; }
    const SupportPtr& output_support() const noexcept { return out_; }
    std::size_t input_size() const noexcept { return in_->size(); }
    std::size_t output_size() const noexcept { return out_->size(); }
    double prob(std::size_t x, std::size_t y) const { return rows_.at(x).at(y); }
    const std::vector<double>& row(std::size_t x) const { return rows_.at(x); }

    static Channel identity(const SupportPtr& support);

private:
    SupportPtr in_;
    SupportPtr out_;
    std::vector<std::vector<double>> rows_;
};

// Output distribution of the channel: mass(y) = sum_x W(y|x) p(x).
DiscreteDistribution pushforward(const Channel& channel, const DiscreteDistribution& p);

}  // namespace fairaudit
