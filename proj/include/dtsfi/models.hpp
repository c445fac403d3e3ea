#pragma once

// Vector fields of the delayed-transmission susceptible/forwarding/immune
// models: the stand-alone phase for the first information piece, and the two
// phase-2 variants that apply once a second piece is posted (long interval:
// first piece already quasi-steady; short interval: first piece still
// spreading).
//
// All populations are absolute user counts and time is measured in hours.
// Mass-action terms appear as beta * X * F; the population size cancels from
// the per-contact derivation so it is never stored.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "dtsfi/error.hpp"

namespace dtsfi {

enum class ModelKind { phase1, lti, sti };

inline std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::phase1: return "phase1";
    case ModelKind::lti: return "lti";
    case ModelKind::sti: return "sti";
    }
    return "unknown";
}

inline ModelKind parse_model_kind(std::string_view name) {
    if (name == "phase1") return ModelKind::phase1;
    if (name == "lti") return ModelKind::lti;
    if (name == "sti") return ModelKind::sti;
    throw ValidationError("unknown model '" + std::string(name) + "' (expected phase1, lti or sti)");
}

namespace detail {

inline void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

inline bool all_finite(std::initializer_list<double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace detail

/// Spread of the first (stand-alone) information piece.
struct Phase1Params {
    double beta1 = 0.0;  ///< contact rate, 1/(user*h)
    double p1 = 0.0;     ///< forwarding probability on contact
    double alpha1 = 1.0; ///< inactivation rate, 1/h
    double s10 = 0.0;    ///< initial susceptible users

    void validate() const {
        detail::require(detail::all_finite({beta1, p1, alpha1, s10}), "phase-1 parameters must be finite");
        detail::require(beta1 >= 0.0, "beta1 must be >= 0");
        detail::require(alpha1 > 0.0, "alpha1 must be > 0");
        detail::require(p1 >= 0.0 && p1 <= 1.0, "p1 must lie in [0, 1]");
        detail::require(s10 > 0.0, "s10 must be > 0");
    }

    friend bool operator==(const Phase1Params&, const Phase1Params&) = default;
};

/// Spread of the second piece. The m indices scale p2 separately for users
/// who forwarded the first piece (m21), saw it without forwarding (m22), and
/// never saw it (m23). Only the products m*p2 are bounded by one.
struct Phase2Params {
    double beta21 = 0.0;
    double beta22 = 0.0;
    double beta23 = 0.0;
    double m21 = 0.0;
    double m22 = 0.0;
    double m23 = 0.0;
    double p2 = 0.0;
    double alpha2 = 1.0;
    double s20 = 0.0; ///< fresh susceptible pool (LTI); unused by the STI field

    void validate() const {
        detail::require(detail::all_finite({beta21, beta22, beta23, m21, m22, m23, p2, alpha2, s20}),
                        "phase-2 parameters must be finite");
        detail::require(beta21 >= 0.0 && beta22 >= 0.0 && beta23 >= 0.0, "phase-2 contact rates must be >= 0");
        detail::require(m21 >= 0.0 && m22 >= 0.0 && m23 >= 0.0, "attractiveness indices must be >= 0");
        detail::require(alpha2 > 0.0, "alpha2 must be > 0");
        detail::require(p2 >= 0.0 && p2 <= 1.0, "p2 must lie in [0, 1]");
        detail::require(s20 >= 0.0, "s20 must be >= 0");
        detail::require(m21 * p2 <= 1.0 && m22 * p2 <= 1.0 && m23 * p2 <= 1.0,
                        "every m*p2 product must be <= 1");
    }

    friend bool operator==(const Phase2Params&, const Phase2Params&) = default;
};

struct Phase1State {
    double s1 = 0.0;
    double f1 = 0.0;
    double i1_plus = 0.0;
    double i1_minus = 0.0;
    double c1 = 0.0;

    friend bool operator==(const Phase1State&, const Phase1State&) = default;
};

struct LtiPhase2State {
    double s2 = 0.0;
    double i1_plus = 0.0;
    double i1_minus = 0.0;
    double f2 = 0.0;
    double i2 = 0.0;
    double c2 = 0.0;

    friend bool operator==(const LtiPhase2State&, const LtiPhase2State&) = default;
};

struct StiPhase2State {
    double s1 = 0.0;
    double f1 = 0.0;
    double i1_plus = 0.0;
    double i1_minus = 0.0;
    double f2 = 0.0;
    double i2 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    friend bool operator==(const StiPhase2State&, const StiPhase2State&) = default;
};

/// Flat view of a state: the first `compartments` entries partition the
/// population and are conserved; the remaining entries are cumulative
/// forwarding accumulators.
template <class State>
struct StateLayout;

template <>
struct StateLayout<Phase1State> {
    static constexpr std::size_t size = 5;
    static constexpr std::size_t compartments = 4;
    static constexpr std::array<std::string_view, size> names{"s1", "f1", "i1_plus", "i1_minus", "c1"};

    static std::array<double, size> pack(const Phase1State& x) { return {x.s1, x.f1, x.i1_plus, x.i1_minus, x.c1}; }
    static Phase1State unpack(const std::array<double, size>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
};

template <>
struct StateLayout<LtiPhase2State> {
    static constexpr std::size_t size = 6;
    static constexpr std::size_t compartments = 5;
    static constexpr std::array<std::string_view, size> names{"s2", "i1_plus", "i1_minus", "f2", "i2", "c2"};

    static std::array<double, size> pack(const LtiPhase2State& x) {
        return {x.s2, x.i1_plus, x.i1_minus, x.f2, x.i2, x.c2};
    }
    static LtiPhase2State unpack(const std::array<double, size>& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }
};

template <>
struct StateLayout<StiPhase2State> {
    static constexpr std::size_t size = 8;
    static constexpr std::size_t compartments = 6;
    static constexpr std::array<std::string_view, size> names{"s1", "f1", "i1_plus", "i1_minus",
                                                              "f2", "i2",  "c1",      "c2"};

    static std::array<double, size> pack(const StiPhase2State& x) {
        return {x.s1, x.f1, x.i1_plus, x.i1_minus, x.f2, x.i2, x.c1, x.c2};
    }
    static StiPhase2State unpack(const std::array<double, size>& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
    }
};

/// Sum of the conserved compartments (the implied population size).
template <class State>
double compartment_total(const State& x) {
    const auto v = StateLayout<State>::pack(x);
    double total = 0.0;
    for (std::size_t i = 0; i < StateLayout<State>::compartments; ++i) total += v[i];
    return total;
}

template <class State>
void require_finite_nonnegative(const State& x, std::string_view who) {
    for (double v : StateLayout<State>::pack(x)) {
        if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite state component");
        if (v < 0.0) throw DomainError(std::string(who) + ": negative state component");
    }
}

/// Contact flow out of one compartment, split by whether the contacted user
/// forwards the new piece.
struct ContactSplit {
    double total = 0.0;
    double forward = 0.0;
    double decline = 0.0;
};

inline ContactSplit split_contacts(double contact_flow, double forward_probability) {
    const double forward = forward_probability * contact_flow;
    return {contact_flow, forward, contact_flow - forward};
}

/// Contacts made by phase-2 forwarders, one split per contacted population.
/// In the STI field the m21 split covers both F1 and I1+ contacts.
struct Phase2Contacts {
    ContactSplit active_forwarders; ///< F1 (STI only)
    ContactSplit inactive_immune;   ///< I1+
    ContactSplit direct_immune;     ///< I1-
    ContactSplit susceptible;       ///< S2 (LTI) or shared S1 (STI)

    double new_forwarders() const {
        return active_forwarders.forward + inactive_immune.forward + direct_immune.forward + susceptible.forward;
    }
    double decliners() const {
        return active_forwarders.decline + inactive_immune.decline + direct_immune.decline + susceptible.decline;
    }
};

inline Phase2Contacts lti_contacts(const LtiPhase2State& x, const Phase2Params& p) {
    Phase2Contacts c;
    c.inactive_immune = split_contacts(p.beta21 * x.i1_plus * x.f2, p.m21 * p.p2);
    c.direct_immune = split_contacts(p.beta22 * x.i1_minus * x.f2, p.m22 * p.p2);
    c.susceptible = split_contacts(p.beta23 * x.s2 * x.f2, p.m23 * p.p2);
    return c;
}

inline Phase2Contacts sti_contacts(const StiPhase2State& x, const Phase2Params& p) {
    Phase2Contacts c;
    c.active_forwarders = split_contacts(p.beta21 * x.f1 * x.f2, p.m21 * p.p2);
    c.inactive_immune = split_contacts(p.beta21 * x.i1_plus * x.f2, p.m21 * p.p2);
    c.direct_immune = split_contacts(p.beta22 * x.i1_minus * x.f2, p.m22 * p.p2);
    c.susceptible = split_contacts(p.beta23 * x.s1 * x.f2, p.m23 * p.p2);
    return c;
}

namespace detail {

inline Phase1State phase1_field(const Phase1State& x, const Phase1Params& p) {
    const ContactSplit contact = split_contacts(p.beta1 * x.s1 * x.f1, p.p1);
    return {
        -contact.total,
        contact.forward - p.alpha1 * x.f1,
        p.alpha1 * x.f1,
        contact.decline,
        contact.forward,
    };
}

inline LtiPhase2State lti_field(const LtiPhase2State& x, const Phase2Params& p) {
    const Phase2Contacts c = lti_contacts(x, p);
    const double inactivation = p.alpha2 * x.f2;
    return {
        -c.susceptible.total,
        -c.inactive_immune.total,
        -c.direct_immune.total,
        c.new_forwarders() - inactivation,
        c.decliners() + inactivation,
        c.new_forwarders(),
    };
}

inline StiPhase2State sti_field(const StiPhase2State& x, const Phase1Params& p1, const Phase2Params& p2) {
    const ContactSplit first = split_contacts(p1.beta1 * x.s1 * x.f1, p1.p1);
    const Phase2Contacts c = sti_contacts(x, p2);
    const double inactivation1 = p1.alpha1 * x.f1;
    const double inactivation2 = p2.alpha2 * x.f2;
    return {
        -first.total - c.susceptible.total,
        first.forward - c.active_forwarders.total - inactivation1,
        inactivation1 - c.inactive_immune.total,
        first.decline - c.direct_immune.total,
        c.new_forwarders() - inactivation2,
        c.decliners() + inactivation2,
        first.forward,
        c.new_forwarders(),
    };
}

} // namespace detail

/// Time derivative of the phase-1 state (accumulator included).
inline Phase1State rhs_phase1(const Phase1State& state, const Phase1Params& params) {
    require_finite_nonnegative(state, "rhs_phase1");
    if (!detail::all_finite({params.beta1, params.p1, params.alpha1}))
        throw DomainError("rhs_phase1: non-finite parameter");
    return detail::phase1_field(state, params);
}

inline LtiPhase2State rhs_lti_phase2(const LtiPhase2State& state, const Phase2Params& params) {
    require_finite_nonnegative(state, "rhs_lti_phase2");
    if (!detail::all_finite({params.beta21, params.beta22, params.beta23, params.m21, params.m22, params.m23,
                             params.p2, params.alpha2}))
        throw DomainError("rhs_lti_phase2: non-finite parameter");
    return detail::lti_field(state, params);
}

/// Joint field for two concurrently spreading pieces sharing one susceptible
/// pool. Contacts of F2 with active F1 users drain F1 whether or not they
/// adopt the new piece.
inline StiPhase2State rhs_sti_phase2(const StiPhase2State& state, const Phase1Params& p1, const Phase2Params& p2) {
    require_finite_nonnegative(state, "rhs_sti_phase2");
    if (!detail::all_finite({p1.beta1, p1.p1, p1.alpha1, p2.beta21, p2.beta22, p2.beta23, p2.m21, p2.m22, p2.m23,
                             p2.p2, p2.alpha2}))
        throw DomainError("rhs_sti_phase2: non-finite parameter");
    return detail::sti_field(state, p1, p2);
}

// Systems bundle a vector field with its parameters; the integrator is
// generic over them.

struct Phase1System {
    using state_type = Phase1State;
    static constexpr ModelKind kind = ModelKind::phase1;

    Phase1Params params;

    Phase1State operator()(const Phase1State& x) const { return detail::phase1_field(x, params); }
};

struct LtiSystem {
    using state_type = LtiPhase2State;
    static constexpr ModelKind kind = ModelKind::lti;

    Phase2Params params;

    LtiPhase2State operator()(const LtiPhase2State& x) const { return detail::lti_field(x, params); }
};

struct StiSystem {
    using state_type = StiPhase2State;
    static constexpr ModelKind kind = ModelKind::sti;

    Phase1Params first;
    Phase2Params second;

    StiPhase2State operator()(const StiPhase2State& x) const { return detail::sti_field(x, first, second); }
};

/// Phase-1 start: S1(0) = s10, one seed of active forwarders, C1(0) = seed.
inline Phase1State initial_phase1(const Phase1Params& params, double seed_forwarders) {
    return {params.s10, seed_forwarders, 0.0, 0.0, seed_forwarders};
}

} // namespace dtsfi
