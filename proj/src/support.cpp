#include "fairaudit/support.hpp"

#include <unordered_set>

namespace fairaudit {

Support::Support(std::vector<std::string> labels,
                 std::vector<std::vector<double>> representatives) {
    if (labels.empty())
        fail(ErrorCode::EmptySupport, "support must contain at least one point");
    std::unordered_set<std::string> seen;
    points_.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!seen.insert(labels[i]).second)
            fail(ErrorCode::InvalidArgument, "duplicate support label '" + labels[i] + "'");
        points_.push_back(SupportPoint{static_cast<int>(i), std::move(labels[i])});
    }
    if (!representatives.empty()) {
        if (representatives.size() != points_.size())
            fail(ErrorCode::InvalidArgument, "representative count does not match support size");
        const std::size_t dim = representatives.front().size();
        for (const auto& r : representatives)
            if (r.size() != dim)
                fail(ErrorCode::InvalidArgument, "representative vectors must share one dimension");
        representatives_ = std::move(representatives);
    }
}

const std::vector<double>& Support::representative(std::size_t i) const {
    if (representatives_.empty())
        fail(ErrorCode::MissingFeatureVectors,
             "support '" + points_.at(i).label + "' carries no feature vectors");
    return representatives_.at(i);
}

std::size_t Support::representative_dim() const noexcept {
    return representatives_.empty() ? 0 : representatives_.front().size();
}

bool Support::same_labels(const Support& other) const noexcept {
    if (points_.size() != other.points_.size()) return false;
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i].label != other.points_[i].label) return false;
    return true;
}

SupportPtr make_support(std::vector<std::string> labels,
                        std::vector<std::vector<double>> representatives) {
    return std::make_shared<Support>(std::move(labels), std::move(representatives));
}

bool aligned(const SupportPtr& a, const SupportPtr& b) noexcept {
    if (!a || !b) return false;
    if (a.get() == b.get()) return true;
    return a->same_labels(*b);
}

void require_aligned(const SupportPtr& a, const SupportPtr& b, const char* what) {
    if (!aligned(a, b))
        fail(ErrorCode::SupportMismatch, std::string(what) + ": supports are not aligned");
}

}  // namespace fairaudit
