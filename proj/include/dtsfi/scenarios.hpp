#pragma once

// Posting-delay scans: the second piece is posted at a range of delays into
// the first piece's run, with the phase-2 model chosen by the first piece's
// phase at that delay.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dtsfi/error.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/indices.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi {

enum class SpreadPhase { outbreak, quasi_steady };

inline std::string_view to_string(SpreadPhase phase) {
    return phase == SpreadPhase::outbreak ? "OUTBREAK" : "QUASI_STEADY";
}

inline double peak_forwarders(const Trajectory<Phase1State>& traj) {
    double peak = 0.0;
    for (const auto& s : traj.states) peak = std::max(peak, s.f1);
    return peak;
}

/// OUTBREAK while F1(tau) is at or above `f1star`.
inline SpreadPhase classify_phase(const Trajectory<Phase1State>& traj, double tau, double f1star) {
    return traj.at(tau).f1 >= f1star ? SpreadPhase::outbreak : SpreadPhase::quasi_steady;
}

/// Threshold at 5% of the run's F1 peak.
inline SpreadPhase classify_phase(const Trajectory<Phase1State>& traj, double tau) {
    return classify_phase(traj, tau, 0.05 * peak_forwarders(traj));
}

struct DelayScanOptions {
    double seed_f1 = 1.0;               ///< first piece's seed forwarders
    double phase1_horizon = 26.0;       ///< hours of first-piece run used for classification
    double phase2_horizon = 26.0;       ///< hours simulated after each posting
    double step = 0.01;
    std::optional<double> f1star;       ///< default: 5% of the F1 peak over phase1_horizon
    double threshold_fraction = 0.05;   ///< F2* relative to each run's own peak
    /// First-piece rates before the posting. When set, phase 1 runs with
    /// these and the shared pool restarts at p1.s10 at each OUTBREAK posting.
    std::optional<Phase1Params> early;
};

struct DelayScanEntry {
    double tau = 0.0;
    SpreadPhase phase = SpreadPhase::outbreak;
    IndexReport report;
    /// F1(tau) / f1star - 1; small magnitudes flag posting times near the phase boundary.
    double boundary_margin = 0.0;
};

struct DelayScan {
    std::vector<DelayScanEntry> entries;
    double f1star = 0.0;
};

/// Posts the second piece at each tau. OUTBREAK uses the short-interval
/// joint model from the full handoff state; QUASI_STEADY uses the
/// long-interval model with the fresh pool p2.s20. Parameters stay fixed
/// across tau.
inline DelayScan delay_scan(const Phase1Params& p1, const Phase2Params& p2, std::span<const double> taus,
                            double seed_f2, const DelayScanOptions& opt = {}) {
    p1.validate();
    p2.validate();
    if (taus.empty()) throw ValidationError("delay scan needs at least one posting time");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] >= 0.0 && taus[i] <= opt.phase1_horizon))
            throw ValidationError("posting time " + std::to_string(taus[i]) + " outside the first piece's horizon");
        if (i > 0 && !(taus[i] > taus[i - 1])) throw ValidationError("posting times must be strictly increasing");
    }

    if (opt.early) opt.early->validate();
    const auto phase1 = run_phase1(opt.early.value_or(p1), opt.seed_f1, opt.phase1_horizon, opt.step);
    DelayScan scan;
    scan.f1star = opt.f1star.value_or(0.05 * peak_forwarders(phase1));

    IntegrationConfig cfg;
    cfg.step = opt.step;
    cfg.t_end = opt.phase2_horizon;
    for (double tau : taus) {
        DelayScanEntry e;
        e.tau = tau;
        e.phase = classify_phase(phase1, tau, scan.f1star);
        e.boundary_margin = scan.f1star > 0.0 ? phase1.at(tau).f1 / scan.f1star - 1.0 : 0.0;
        try {
            if (e.phase == SpreadPhase::outbreak) {
                const StiSystem sys{p1, p2};
                StiPhase2State start = handoff_sti(phase1, tau, seed_f2);
                if (opt.early) start.s1 = p1.s10;
                e.report = analyze(sys, integrate(sys, start, cfg), opt.threshold_fraction);
            } else {
                const LtiSystem sys{p2};
                e.report = analyze(sys, integrate(sys, handoff_lti(phase1, tau, p2.s20, seed_f2), cfg),
                                   opt.threshold_fraction);
            }
        } catch (const IntegrationError& err) {
            throw IntegrationError(std::string("delay scan at tau=") + std::to_string(tau) + ": " + err.what(),
                                   tau + err.time());
        }
        scan.entries.push_back(e);
    }
    return scan;
}

} // namespace dtsfi
