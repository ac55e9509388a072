#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace fairaudit {

// Neumaier-compensated accumulator. Used for every mass/expectation sum so
// results stay stable on large supports.
class KahanSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Shortest round-trip decimal rendering. All report files go through this so
// repeated runs are byte-identical.
std::string format_double(double x);

}  // namespace fairaudit
