#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fairaudit/error.hpp"

namespace fairaudit {

struct SupportPoint {
    int id = 0;           // dense 0..n-1
    std::string label;    // unique within a support
};

// Ordered finite alphabet. Immutable after construction; shared between the
// distributions, channels and score functions defined over it so that
// pairwise operations can verify alignment cheaply.
class Support {
public:
    explicit Support(std::vector<std::string> labels,
                     std::vector<std::vector<double>> representatives = {});

    std::size_t size() const noexcept { return points_.size(); }
    const SupportPoint& point(std::size_t i) const { return points_.at(i); }
    const std::string& label(std::size_t i) const { return points_.at(i).label; }
    const std::vector<SupportPoint>& points() const noexcept { return points_; }

    // Optional numeric coordinates per point (feature vectors of the cell a
    // point represents). Empty when the support is purely symbolic.
    bool has_representatives() const noexcept { return !representatives_.empty(); }
    const std::vector<double>& representative(std::size_t i) const;
    std::size_t representative_dim() const noexcept;

    bool same_labels(const Support& other) const noexcept;

private:
    std::vector<SupportPoint> points_;
    std::vector<std::vector<double>> representatives_;
};

using SupportPtr = std::shared_ptr<const Support>;

SupportPtr make_support(std::vector<std::string> labels,
                        std::vector<std::vector<double>> representatives = {});

// Two supports align when they are the same object or carry identical label
// sequences. No implicit reindexing anywhere.
bool aligned(const SupportPtr& a, const SupportPtr& b) noexcept;

void require_aligned(const SupportPtr& a, const SupportPtr& b, const char* what);

}  // namespace fairaudit
