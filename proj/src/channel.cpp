#include "fairaudit/channel.hpp"

#include <cmath>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

Channel::Channel(SupportPtr input_support, SupportPtr output_support,
                 std::vector<std::vector<double>> rows)
    : in_(std::move(input_support)), out_(std::move(output_support)), rows_(std::move(rows)) {
    if (!in_ || !out_ || in_->size() == 0 || out_->size() == 0)
        fail(ErrorCode::EmptySupport, "channel needs nonempty input and output supports");
    if (rows_.size() != in_->size())
        fail(ErrorCode::SupportMismatch, "channel row count does not match input support");
    for (std::size_t x = 0; x < rows_.size(); ++x) {
        if (rows_[x].size() != out_->size())
            fail(ErrorCode::SupportMismatch,
                 "channel row '" + in_->label(x) + "' does not match output support");
        KahanSum total;
        for (double w : rows_[x]) {
            if (!(w >= 0.0) || !std::isfinite(w))
                fail(ErrorCode::NegativeWeight,
                     "negative or non-finite entry in channel row '" + in_->label(x) + "'");
            total.add(w);
        }
        if (std::abs(total.value() - 1.0) > 1e-12)
            fail(ErrorCode::InvalidArgument, "channel row '" + in_->label(x) + "' sums to " +
                                                 format_double(total.value()));
    }
}

Channel Channel::identity(const SupportPtr& support) {
    std::vector<std::vector<double>> rows(support->size(),
                                          std::vector<double>(support->size(), 0.0));
    for (std::size_t i = 0; i < support->size(); ++i) rows[i][i] = 1.0;
    return Channel(support, support, std::move(rows));
}

DiscreteDistribution pushforward(const Channel& channel, const DiscreteDistribution& p) {
    require_aligned(p.support(), channel.input_support(), "pushforward");
    const std::size_t ny = channel.output_size();
    std::vector<KahanSum> acc(ny);
    for (std::size_t x = 0; x < p.size(); ++x) {
        const double px = p.mass(x);
        if (px == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) acc[y].add(channel.prob(x, y) * px);
    }
    std::vector<double> mass(ny);
    KahanSum total;
    for (std::size_t y = 0; y < ny; ++y) {
        mass[y] = acc[y].value();
        total.add(mass[y]);
    }
    // rows and p are stochastic, so the residual is rounding noise only
    const double z = total.value();
    for (double& m : mass) m /= z;
    return DiscreteDistribution(channel.output_support(), std::move(mass));
}

}  // namespace fairaudit
