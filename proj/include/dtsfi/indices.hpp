#pragma once

// Reproduction ratios and the propagation indices of the second information
// piece: peak, final size, threshold crossing times and velocities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dtsfi/error.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi {

/// Long-interval ratio: expected new-piece forwards caused by one forwarder
/// at posting time, given the immune classes I1+(tau), I1-(tau) and the fresh
/// pool s20.
inline double r0_lti(const Phase2Params& p, double i1_plus_tau, double i1_minus_tau) {
    if (!(p.alpha2 > 0.0)) throw DomainError("r0_lti: alpha2 must be > 0");
    if (i1_plus_tau < 0.0 || i1_minus_tau < 0.0) throw DomainError("r0_lti: populations must be >= 0");
    const double gain = p.m21 * p.p2 * p.beta21 * i1_plus_tau + p.m22 * p.p2 * p.beta22 * i1_minus_tau +
                        p.m23 * p.p2 * p.beta23 * p.s20;
    return gain / p.alpha2;
}

/// Short-interval ratio; active and inactive forwarders of the first piece
/// share the m21 channel.
inline double r0_sti(const Phase2Params& p, double f1_tau, double i1_plus_tau, double i1_minus_tau, double s1_tau) {
    if (!(p.alpha2 > 0.0)) throw DomainError("r0_sti: alpha2 must be > 0");
    if (f1_tau < 0.0 || i1_plus_tau < 0.0 || i1_minus_tau < 0.0 || s1_tau < 0.0)
        throw DomainError("r0_sti: populations must be >= 0");
    const double gain = p.m21 * p.p2 * p.beta21 * f1_tau + p.m21 * p.p2 * p.beta21 * i1_plus_tau +
                        p.m22 * p.p2 * p.beta22 * i1_minus_tau + p.m23 * p.p2 * p.beta23 * s1_tau;
    return gain / p.alpha2;
}

inline double r0_at_posting(const LtiSystem& system, const LtiPhase2State& initial) {
    Phase2Params p = system.params;
    p.s20 = initial.s2;
    return r0_lti(p, initial.i1_plus, initial.i1_minus);
}

inline double r0_at_posting(const StiSystem& system, const StiPhase2State& initial) {
    return r0_sti(system.second, initial.f1, initial.i1_plus, initial.i1_minus, initial.s1);
}

struct IndexReport {
    std::optional<double> r0;
    double f2max = 0.0;
    double t2max = 0.0;
    double c2_final = 0.0;
    bool final_size_converged = true;
    std::optional<double> t2b;
    std::optional<double> t2e;
    std::optional<double> t2i;
    std::optional<double> v2o;
    std::optional<double> v2d;
    double threshold_f2star = 0.0;
};

/// F2 and C2 of a phase-2 run on a common time grid.
struct ForwardingSeries {
    std::vector<double> times;
    std::vector<double> f2;
    std::vector<double> c2;
};

template <class State>
ForwardingSeries forwarding_series(const Trajectory<State>& traj) {
    return {traj.times, traj.component(&State::f2), traj.component(&State::c2)};
}

namespace detail {

inline double crossing_time(double t0, double f0, double t1, double f1, double level) {
    if (f1 == f0) return t1;
    return t0 + (level - f0) / (f1 - f0) * (t1 - t0);
}

inline double interpolate(std::span<const double> ts, std::span<const double> ys, double t) {
    if (t <= ts.front()) return ys.front();
    if (t >= ts.back()) return ys.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

} // namespace detail

/// Indices of one phase-2 run. Times are measured from the first node. The
/// outbreak window is where F2 sits at or above `f2star`; crossings are
/// located by linear interpolation between grid nodes. Indices that need a
/// crossing are left empty when the crossing does not exist.
inline IndexReport extract_indices(const ForwardingSeries& series, double f2star) {
    const auto& ts = series.times;
    const auto& f = series.f2;
    if (ts.empty() || ts.size() != f.size() || ts.size() != series.c2.size())
        throw ValidationError("extract_indices: series must be non-empty and aligned");
    if (!(f2star >= 0.0) || !std::isfinite(f2star)) throw ValidationError("extract_indices: f2star must be >= 0");

    IndexReport r;
    r.threshold_f2star = f2star;
    const double t0 = ts.front();

    const auto peak = std::max_element(f.begin(), f.end()); // earliest on ties
    const auto ipeak = static_cast<std::size_t>(peak - f.begin());
    r.f2max = *peak;
    r.t2max = ts[ipeak] - t0;
    r.c2_final = series.c2.back();

    const double t_end = ts.back();
    if (t_end > t0) {
        const double c_late = detail::interpolate(ts, series.c2, t0 + 0.9 * (t_end - t0));
        r.final_size_converged = std::abs(r.c2_final - c_late) <= 1e-3 * std::abs(r.c2_final);
    }

    if (!(f2star > 0.0) || r.f2max < f2star) return r;

    // Outbreak begins at the first upward crossing, or at the start if F2 is
    // already above the threshold.
    double begin = t0;
    if (f.front() < f2star) {
        for (std::size_t i = 1; i < f.size(); ++i) {
            if (f[i - 1] < f2star && f[i] >= f2star) {
                begin = detail::crossing_time(ts[i - 1], f[i - 1], ts[i], f[i], f2star);
                break;
            }
        }
    }
    r.t2b = begin - t0;

    for (std::size_t i = f.size() - 1; i >= 1; --i) {
        if (f[i - 1] >= f2star && f[i] < f2star) {
            r.t2e = detail::crossing_time(ts[i - 1], f[i - 1], ts[i], f[i], f2star) - t0;
            break;
        }
    }

    const double rise = r.f2max - f2star;
    if (r.t2max > *r.t2b) r.v2o = rise / (r.t2max - *r.t2b);
    if (r.t2e) {
        r.t2i = *r.t2e - *r.t2b;
        if (*r.t2e > r.t2max) r.v2d = rise / (*r.t2e - r.t2max);
    }
    return r;
}

template <class State>
IndexReport extract_indices(const Trajectory<State>& traj, double f2star) {
    return extract_indices(forwarding_series(traj), f2star);
}

/// Threshold set to `fraction` of the run's own F2 peak.
inline IndexReport extract_indices_relative(const ForwardingSeries& series, double fraction = 0.05) {
    if (series.f2.empty()) throw ValidationError("extract_indices: empty series");
    const double peak = *std::max_element(series.f2.begin(), series.f2.end());
    return extract_indices(series, fraction * peak);
}

template <class State>
IndexReport extract_indices_relative(const Trajectory<State>& traj, double fraction = 0.05) {
    return extract_indices_relative(forwarding_series(traj), fraction);
}

/// Compares the sign of F2'(0) with the sign of r0 - 1. Empty when r0 lies
/// within 1e-9 of one or F2(0) = 0, where the sign test says nothing.
template <class System>
std::optional<bool> check_threshold(double r0, const System& system,
                                    const Trajectory<typename System::state_type>& traj) {
    if (std::abs(r0 - 1.0) < 1e-9) return std::nullopt;
    const auto d = system(traj.states.front());
    if (d.f2 == 0.0) return std::nullopt;
    return (d.f2 > 0.0) == (r0 > 1.0);
}

template <class System>
IndexReport analyze(const System& system, const Trajectory<typename System::state_type>& traj,
                    double fraction = 0.05) {
    IndexReport r = extract_indices_relative(traj, fraction);
    r.r0 = r0_at_posting(system, traj.states.front());
    return r;
}

} // namespace dtsfi
