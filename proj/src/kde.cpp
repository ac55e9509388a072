#include "fairaudit/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fairaudit/error.hpp"
#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

// Linear-interpolated quantile on sorted data (the common "type 7" rule).
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) return 0.0;
    KahanSum mean_acc;
    for (double x : samples) mean_acc.add(x);
    const double mean = mean_acc.value() / static_cast<double>(n);
    KahanSum var_acc;
    for (double x : samples) var_acc.add((x - mean) * (x - mean));
    const double sd = std::sqrt(std::max(0.0, var_acc.value() / static_cast<double>(n - 1)));
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

KdeResult kde_density(std::span<const double> samples, double bandwidth,
                      std::size_t grid_points) {
    if (samples.empty())
        fail(ErrorCode::InvalidArgument, "kde_density: at least one sample is required");
    if (grid_points < 2)
        fail(ErrorCode::InvalidArgument, "kde_density: grid needs at least 2 points");
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    KdeResult result;
    if (!(bandwidth > 0.0)) bandwidth = silverman_bandwidth(samples);
    if (*lo_it == *hi_it || !(bandwidth > 0.0)) {
        result.degenerate = true;
        result.spike_at = *lo_it;
        return result;
    }
    result.bandwidth = bandwidth;
    const double lo = *lo_it - 4.0 * bandwidth;
    const double hi = *hi_it + 4.0 * bandwidth;
    const double step = (hi - lo) / static_cast<double>(grid_points - 1);
    const double scale =
        1.0 / (static_cast<double>(samples.size()) * bandwidth *
               std::sqrt(2.0 * std::numbers::pi));
    result.grid.resize(grid_points);
    result.density.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double x = lo + step * static_cast<double>(i);
        KahanSum acc;
        for (double s : samples) {
            const double z = (x - s) / bandwidth;
            acc.add(std::exp(-0.5 * z * z));
        }
        result.grid[i] = x;
        result.density[i] = scale * acc.value();
    }
    return result;
}

}  // namespace fairaudit
