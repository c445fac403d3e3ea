#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace dtsfi {

struct NelderMeadOptions {
    double initial_step = 0.5;
    double f_tolerance = 1e-10; ///< relative spread of simplex values
    double x_tolerance = 1e-8;  ///< simplex diameter in the search space
    std::size_t max_evaluations = 6000;
    std::size_t max_rebuilds = 3; ///< fresh simplices around the incumbent after convergence
    /// Dimension-dependent coefficients (Gao and Han 2012).
    bool adaptive = false;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Unconstrained downhill simplex. Classic coefficients are reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2; adaptive ones are 1, 1 + 2/n,
/// 3/4 - 1/(2n), 1 - 1/n. Non-finite objective values are treated as +inf. After
/// the simplex collapses it is rebuilt around the best vertex up to
/// `max_rebuilds` times, which guards against premature collapse.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                                    std::vector<double> start, const NelderMeadOptions& opt = {}) {
    const std::size_t n = start.size();
    NelderMeadResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double f = objective(x);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    const double dim = static_cast<double>(std::max<std::size_t>(n, 1));
    const double expand = opt.adaptive ? 1.0 + 2.0 / dim : 2.0;
    const double contract = opt.adaptive ? 0.75 - 0.5 / dim : 0.5;
    const double shrink = opt.adaptive ? 1.0 - 1.0 / dim : 0.5;

    auto build = [&](const std::vector<double>& base, double f_base) {
        simplex[0] = base;
        values[0] = f_base;
        for (std::size_t i = 0; i < n; ++i) {
            simplex[i + 1] = base;
            simplex[i + 1][i] += opt.initial_step;
            values[i + 1] = eval(simplex[i + 1]);
        }
    };
    auto point = [&](double coef, const std::vector<double>& from, std::vector<double>& out) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (from[j] - centroid[j]);
    };

    build(start, eval(start));
    std::size_t rebuilds = 0;
    double rebuild_best = std::numeric_limits<double>::infinity();

    while (result.evaluations < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j < n; ++j) diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
        const double spread = values[worst] - values[best];
        const bool collapsed =
            std::isfinite(values[worst]) && spread <= opt.f_tolerance * (std::abs(values[best]) + 1e-300) &&
            diameter <= opt.x_tolerance;
        if (collapsed || diameter <= opt.x_tolerance * 1e-3) {
            // Stop once a rebuild no longer improves the incumbent.
            if (rebuilds >= opt.max_rebuilds || values[best] >= rebuild_best * (1.0 - opt.f_tolerance)) {
                result.converged = true;
                break;
            }
            rebuild_best = values[best];
            ++rebuilds;
            const auto base = simplex[best];
            build(base, values[best]);
            continue;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);

        point(-1.0, simplex[worst], trial);
        const double f_reflect = eval(trial);
        if (f_reflect < values[best]) {
            point(-expand, simplex[worst], trial2);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }
        const bool outside = f_reflect < values[worst];
        point(outside ? -contract : contract, simplex[worst], trial2);
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[best][j] + shrink * (simplex[i][j] - simplex[best][j]);
            values[i] = eval(simplex[i]);
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    result.value = *it;
    result.x = simplex[static_cast<std::size_t>(it - values.begin())];
    return result;
}

} // namespace dtsfi
