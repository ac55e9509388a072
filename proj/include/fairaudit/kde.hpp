#pragma once

#include <span>
#include <vector>

namespace fairaudit {

struct KdeResult {
    bool degenerate = false;  // all samples equal: a point mass, no curve
    double spike_at = 0.0;    // location of the point mass when degenerate
    double bandwidth = 0.0;
    std::vector<double> grid;
    std::vector<double> density;
};

// Silverman's rule of thumb: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
// Zero when the samples carry no spread.
double silverman_bandwidth(std::span<const double> samples);

// Gaussian-kernel density on an even grid spanning the sample range plus 4
// bandwidths on each side. bandwidth <= 0 selects Silverman's rule.
KdeResult kde_density(std::span<const double> samples, double bandwidth = 0.0,
                      std::size_t grid_points = 401);

}  // namespace fairaudit
