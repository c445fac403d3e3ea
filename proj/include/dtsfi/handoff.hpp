#pragma once

// Construction of phase-2 initial states from a phase-1 run at the posting
// time of the second piece.

#include "dtsfi/error.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi {

/// Long-interval handoff: only the two immune classes of the first piece carry
/// over; the new piece meets a fresh susceptible pool of size `s20`.
inline LtiPhase2State handoff_lti(const Trajectory<Phase1State>& phase1, double tau, double s20, double seed_f2) {
    if (!(seed_f2 >= 0.0) || !(s20 >= 0.0)) throw ValidationError("handoff_lti: seed and s20 must be >= 0");
    const Phase1State at = phase1.at(tau);
    return {s20, at.i1_plus, at.i1_minus, seed_f2, 0.0, seed_f2};
}

/// Short-interval handoff: the full phase-1 state carries over and the new
/// piece starts with `seed_f2` active forwarders.
inline StiPhase2State handoff_sti(const Trajectory<Phase1State>& phase1, double tau, double seed_f2) {
    if (!(seed_f2 >= 0.0)) throw ValidationError("handoff_sti: seed must be >= 0");
    const Phase1State at = phase1.at(tau);
    return {at.s1, at.f1, at.i1_plus, at.i1_minus, seed_f2, 0.0, at.c1, seed_f2};
}

/// Phase-1 run from t = 0 to `t_end` (which may be zero).
inline Trajectory<Phase1State> run_phase1(const Phase1Params& params, double seed_f1, double t_end,
                                          double step = 0.01) {
    params.validate();
    if (!(seed_f1 >= 0.0)) throw ValidationError("run_phase1: seed must be >= 0");
    IntegrationConfig cfg;
    cfg.step = step;
    cfg.t_end = t_end;
    return integrate(Phase1System{params}, initial_phase1(params, seed_f1), cfg);
}

} // namespace dtsfi
