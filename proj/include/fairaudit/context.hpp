#pragma once

#include "fairaudit/channel.hpp"

namespace fairaudit {

// The fixed joint structure behind an audit: the two group-conditional input
// distributions p0, p1 on one support, the channel, and the induced output
// marginals q0, q1. Construction enforces the Markov relation and rejects
// output atoms with q0(y) = 0, which the downstream closed forms divide by.
class AuditContext {
public:
    AuditContext(DiscreteDistribution p0, DiscreteDistribution p1, Channel channel);

    const DiscreteDistribution& p0() const noexcept { return p0_; }
    const DiscreteDistribution& p1() const noexcept { return p1_; }
    const Channel& channel() const noexcept { return channel_; }
    const DiscreteDistribution& q0() const noexcept { return q0_; }
    const DiscreteDistribution& q1() const noexcept { return q1_; }

    const SupportPtr& input_support() const noexcept { return p0_.support(); }
    const SupportPtr& output_support() const noexcept { return channel_.output_support(); }
    std::size_t input_size() const noexcept { return p0_.size(); }
    std::size_t output_size() const noexcept { return q0_.size(); }

    bool binary_output() const noexcept { return q0_.size() == 2; }

private:
    DiscreteDistribution p0_;
    DiscreteDistribution p1_;
    Channel channel_;
    DiscreteDistribution q0_;
    DiscreteDistribution q1_;
};

}  // namespace fairaudit
