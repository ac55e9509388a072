#pragma once

#include <random>
#include <string>
#include <vector>

#include "fairaudit/context.hpp"
#include "fairaudit/perturbation.hpp"

namespace fairaudit::test {

// 2-cell instance: the zero-mean direction space is one-dimensional, so
// every feasible direction is +-(0.5, -2) and closed forms collapse nicely.
inline AuditContext two_cell() {
    SupportPtr in = make_support({"a", "b"});
    SupportPtr out = make_support({"0", "1"});
    return AuditContext(make_distribution(in, {0.8, 0.2}),
                        make_distribution(in, {0.2, 0.8}),
                        Channel(in, out, {{0.25, 0.75}, {0.9, 0.1}}));
}

// 3-cell instance in general position (a2 > 0, rho_m in (0,1)).
inline AuditContext three_cell() {
    SupportPtr in = make_support({"a", "b", "c"});
    SupportPtr out = make_support({"0", "1"});
    return AuditContext(make_distribution(in, {0.5, 0.3, 0.2}),
                        make_distribution(in, {0.2, 0.3, 0.5}),
                        Channel(in, out, {{0.2, 0.8}, {0.6, 0.4}, {0.7, 0.3}}));
}

// Identical groups and a channel that ignores the input: no disparity at all.
inline AuditContext no_disparity() {
    SupportPtr in = make_support({"a", "b"});
    SupportPtr out = make_support({"0", "1"});
    return AuditContext(make_distribution(in, {0.6, 0.4}),
                        make_distribution(in, {0.6, 0.4}),
                        Channel(in, out, {{0.3, 0.7}, {0.3, 0.7}}));
}

inline AuditContext random_context(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> mass(0.2, 1.0);
    std::uniform_real_distribution<double> prob(0.15, 0.85);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "x" + std::to_string(i);
    SupportPtr in = make_support(labels);
    SupportPtr out = make_support({"0", "1"});
    std::vector<double> w0(n), w1(n);
    for (double& v : w0) v = mass(rng);
    for (double& v : w1) v = mass(rng);
    std::vector<std::vector<double>> rows(n);
    for (auto& row : rows) {
        const double p1y = prob(rng);
        row = {1.0 - p1y, p1y};
    }
    return AuditContext(make_distribution(in, w0), make_distribution(in, w1),
                        Channel(in, out, std::move(rows)));
}

inline ScoreFunction random_direction(std::mt19937_64& rng, const DiscreteDistribution& p0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(p0.size());
    for (double& x : v) x = gauss(rng);
    return normalize_direction(p0, ScoreFunction(p0.support(), std::move(v)));
}

}  // namespace fairaudit::test
