#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtsfi/error.hpp"

namespace dtsfi {

struct ParameterRange {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
};

struct SamplingPlan {
    std::vector<ParameterRange> ranges;
    std::size_t samples = 1000;
    std::uint64_t seed = 1;

    void validate(std::size_t min_samples = 100) const {
        if (ranges.empty()) throw ValidationError("sampling plan has no parameters");
        for (const auto& r : ranges)
            if (!(std::isfinite(r.lower) && std::isfinite(r.upper) && r.lower < r.upper))
                throw ValidationError("sampling range for '" + r.name + "' must satisfy min < max");
        if (samples < min_samples)
            throw ValidationError("sampling plan needs at least " + std::to_string(min_samples) + " samples");
    }
};

/// Latin hypercube on the unit cube: each column visits every one of the n
/// strata exactly once, uniformly inside the stratum.
inline Eigen::MatrixXd lhs_unit(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::size_t> strata(rows);
    const double n = static_cast<double>(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        std::shuffle(strata.begin(), strata.end(), rng);
        for (std::size_t r = 0; r < rows; ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                (static_cast<double>(strata[r]) + unit(rng)) / n;
    }
    return out;
}

/// Rows are samples, columns follow plan.ranges. Deterministic in plan.seed.
inline Eigen::MatrixXd lhs_sample(const SamplingPlan& plan) {
    plan.validate();
    std::mt19937_64 rng(plan.seed);
    Eigen::MatrixXd x = lhs_unit(plan.samples, plan.ranges.size(), rng);
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const auto& r = plan.ranges[static_cast<std::size_t>(c)];
        x.col(c) = (r.lower + (r.upper - r.lower) * x.col(c).array()).matrix();
    }
    return x;
}

} // namespace dtsfi
