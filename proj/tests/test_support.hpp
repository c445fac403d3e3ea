#pragma once

// Shared random draws for property tests.

#include <cmath>
#include <random>

#include "dtsfi/models.hpp"

namespace dtsfi::testkit {

class Draws {
public:
    explicit Draws(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    /// Population count; zero with probability 1/8.
    double count(double hi = 1e6) { return uniform(0.0, 1.0) < 0.125 ? 0.0 : log_uniform(1e-2, hi); }

    Phase1Params phase1() {
        return {log_uniform(1e-8, 1e-2), uniform(0.0, 1.0), log_uniform(1e-3, 10.0), log_uniform(1e2, 1e7)};
    }

    Phase2Params phase2() {
        Phase2Params p;
        p.beta21 = log_uniform(1e-8, 1e-2);
        p.beta22 = log_uniform(1e-8, 1e-2);
        p.beta23 = log_uniform(1e-8, 1e-2);
        p.p2 = uniform(1e-3, 1.0);
        const double cap = std::min(10.0, 1.0 / p.p2);
        p.m21 = uniform(0.0, cap);
        p.m22 = uniform(0.0, cap);
        p.m23 = uniform(0.0, cap);
        p.alpha2 = log_uniform(1e-3, 10.0);
        p.s20 = log_uniform(1e2, 1e6);
        return p;
    }

    Phase1State phase1_state() { return {count(), count(), count(), count(), count()}; }
    LtiPhase2State lti_state() { return {count(), count(), count(), count(), count(), count()}; }
    StiPhase2State sti_state() { return {count(), count(), count(), count(), count(), count(), count(), count()}; }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// |sum of compartment derivatives| relative to the largest compartment derivative.
template <class State>
double relative_imbalance(const State& d) {
    const auto v = StateLayout<State>::pack(d);
    double sum = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < StateLayout<State>::compartments; ++i) {
        sum += v[i];
        scale = std::max(scale, std::abs(v[i]));
    }
    return scale == 0.0 ? 0.0 : std::abs(sum) / scale;
}

} // namespace dtsfi::testkit
