#include "fairaudit/context.hpp"

namespace fairaudit {

AuditContext::AuditContext(DiscreteDistribution p0, DiscreteDistribution p1, Channel channel)
    : p0_(std::move(p0)),
      p1_(std::move(p1)),
      channel_(std::move(channel)),
      q0_(pushforward(channel_, p0_)),
      q1_(pushforward(channel_, p1_)) {
    require_aligned(p0_.support(), p1_.support(), "audit context");
    require_aligned(p0_.support(), channel_.input_support(), "audit context");
    for (std::size_t y = 0; y < q0_.size(); ++y) {
        if (q0_.mass(y) == 0.0)
            fail(ErrorCode::ZeroOutputMass,
                 "output atom '" + q0_.support()->label(y) +
                     "' has zero mass under group 0; remove it from the output "
                     "support or use a non-degenerate channel");
    }
}

}  // namespace fairaudit
