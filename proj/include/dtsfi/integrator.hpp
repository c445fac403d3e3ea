#pragma once

// Fixed-step explicit integration of the model vector fields. Classical RK4
// is the production path; forward Euler is kept as an independent low-order
// reference for cross-checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dtsfi/error.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi {

struct IntegrationConfig {
    double step = 0.01;           ///< hours
    double t_end = 0.0;           ///< hours, absolute
    std::size_t record_every = 1; ///< keep every n-th node (first and last always kept)
    double t_start = 0.0;

    void validate() const {
        if (!(std::isfinite(step) && step > 0.0)) throw ValidationError("integration step must be > 0");
        if (!std::isfinite(t_start) || !std::isfinite(t_end)) throw ValidationError("integration horizon must be finite");
        if (!(t_end >= t_start)) throw ValidationError("integration horizon must end after it starts");
        if (record_every < 1) throw ValidationError("record_every must be >= 1");
    }
};

struct IntegrationDiagnostics {
    std::size_t steps = 0;
    std::size_t clamp_events = 0;
    double clamped_mass = 0.0; ///< total magnitude of negative undershoot set to zero
};

template <class State>
struct Trajectory {
    ModelKind model = ModelKind::phase1;
    std::vector<double> times;
    std::vector<State> states;
    IntegrationDiagnostics diagnostics;

    std::size_t size() const { return times.size(); }
    double start_time() const { return times.front(); }
    double end_time() const { return times.back(); }

    /// Linear interpolation between the bracketing nodes.
    State at(double t) const {
        if (times.empty()) throw RangeError("empty trajectory");
        const double tol = 1e-9 * std::max(1.0, std::abs(end_time()));
        if (!(t >= start_time() - tol && t <= end_time() + tol))
            throw RangeError("time " + std::to_string(t) + " outside trajectory range [" +
                             std::to_string(start_time()) + ", " + std::to_string(end_time()) + "]");
        if (t <= start_time()) return states.front();
        if (t >= end_time()) return states.back();
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - times.begin());
        const std::size_t lo = hi - 1;
        if (times[lo] == t) return states[lo];
        const double w = (t - times[lo]) / (times[hi] - times[lo]);
        using L = StateLayout<State>;
        const auto a = L::pack(states[lo]);
        const auto b = L::pack(states[hi]);
        std::array<double, L::size> out{};
        for (std::size_t i = 0; i < L::size; ++i) out[i] = a[i] + w * (b[i] - a[i]);
        return L::unpack(out);
    }

    /// One field of every node, e.g. `component(&LtiPhase2State::f2)`.
    template <class Member>
    std::vector<double> component(Member State::*field) const {
        std::vector<double> out;
        out.reserve(states.size());
        for (const auto& s : states) out.push_back(s.*field);
        return out;
    }

    /// Interpolated values of one field at sorted query times.
    template <class Member>
    std::vector<double> sample(Member State::*field, std::span<const double> query) const {
        std::vector<double> out;
        out.reserve(query.size());
        for (double t : query) out.push_back(at(t).*field);
        return out;
    }
};

namespace detail {

template <std::size_t N>
std::array<double, N> axpy(const std::array<double, N>& x, double a, const std::array<double, N>& y) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + a * y[i];
    return out;
}

enum class Scheme { rk4, euler };

template <class System, class State = typename System::state_type>
std::array<double, StateLayout<State>::size> evaluate(const System& system, const std::array<double, StateLayout<State>::size>& v) {
    using L = StateLayout<State>;
    return L::pack(system(L::unpack(v)));
}

/// Zeroes tiny negative undershoot; anything below -1e-9 of the population
/// is an error.
template <std::size_t N>
void clamp_or_fail(std::array<double, N>& v, std::size_t compartments, double t, IntegrationDiagnostics& diag) {
    double total = 0.0;
    for (std::size_t i = 0; i < compartments; ++i) {
        if (!std::isfinite(v[i])) throw IntegrationError("non-finite state", t);
        total += std::max(v[i], 0.0);
    }
    for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(v[i])) throw IntegrationError("non-finite state", t);
        if (v[i] < 0.0) {
            if (v[i] < -1e-9 * total) throw IntegrationError("compartment driven negative (step too large?)", t);
            diag.clamped_mass += -v[i];
            ++diag.clamp_events;
            v[i] = 0.0;
        }
    }
}

template <class System>
Trajectory<typename System::state_type> run(const System& system, const typename System::state_type& initial,
                                            const IntegrationConfig& cfg, Scheme scheme) {
    using State = typename System::state_type;
    using L = StateLayout<State>;
    cfg.validate();

    auto v = L::pack(initial);
    for (double x : v)
        if (!std::isfinite(x) || x < 0.0)
            throw ValidationError("initial state must be finite and nonnegative");

    const double span = cfg.t_end - cfg.t_start;
    // Steps that land within 1e-9 of the horizon are treated as exact.
    std::size_t n = static_cast<std::size_t>(std::ceil(span / cfg.step - 1e-9));
    if (span > 0.0 && n == 0) n = 1;

    Trajectory<State> traj;
    traj.model = System::kind;
    const std::size_t expected = n / cfg.record_every + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);
    traj.times.push_back(cfg.t_start);
    traj.states.push_back(initial);

    double t = cfg.t_start;
    for (std::size_t k = 0; k < n; ++k) {
        const double t_next = (k + 1 == n) ? cfg.t_end : cfg.t_start + static_cast<double>(k + 1) * cfg.step;
        const double h = t_next - t;
        if (scheme == Scheme::rk4) {
            const auto k1 = evaluate(system, v);
            const auto k2 = evaluate(system, axpy(v, 0.5 * h, k1));
            const auto k3 = evaluate(system, axpy(v, 0.5 * h, k2));
            const auto k4 = evaluate(system, axpy(v, h, k3));
            for (std::size_t i = 0; i < L::size; ++i) v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        } else {
            const auto k1 = evaluate(system, v);
            for (std::size_t i = 0; i < L::size; ++i) v[i] += h * k1[i];
        }
        t = t_next;
        clamp_or_fail(v, L::compartments, t, traj.diagnostics);
        ++traj.diagnostics.steps;
        if ((k + 1) % cfg.record_every == 0 || k + 1 == n) {
            traj.times.push_back(t);
            traj.states.push_back(L::unpack(v));
        }
    }
    return traj;
}

} // namespace detail

/// Fixed-step classical Runge-Kutta over [cfg.t_start, cfg.t_end]. The last
/// step is shortened to land exactly on t_end.
template <class System>
Trajectory<typename System::state_type> integrate(const System& system, const typename System::state_type& initial,
                                                  const IntegrationConfig& cfg) {
    return detail::run(system, initial, cfg, detail::Scheme::rk4);
}

/// Forward Euler with the same contract as integrate(); reference use only.
template <class System>
Trajectory<typename System::state_type> integrate_oracle(const System& system,
                                                         const typename System::state_type& initial,
                                                         const IntegrationConfig& cfg) {
    return detail::run(system, initial, cfg, detail::Scheme::euler);
}

/// Largest relative change of the conserved compartment sum along a run.
template <class State>
double conservation_drift(const Trajectory<State>& traj) {
    const double reference = compartment_total(traj.states.front());
    if (reference == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& s : traj.states) worst = std::max(worst, std::abs(compartment_total(s) - reference) / reference);
    return worst;
}

} // namespace dtsfi
