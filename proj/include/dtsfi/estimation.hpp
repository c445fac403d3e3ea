#pragma once

// Least-squares calibration against cumulative forwarding series.
//
// Every model run starts at the first observation of the series it is
// compared with: that row supplies the seed forwarders F(0) = C(0), and model
// time zero is aligned with it. Predictions are read off the integration grid
// by linear interpolation at the observation times.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "dtsfi/dataset.hpp"
#include "dtsfi/error.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/lhs.hpp"
#include "dtsfi/models.hpp"
#include "dtsfi/nelder_mead.hpp"

namespace dtsfi {

namespace detail {

inline double sum_of_squares(std::span<const double> r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
}

inline double series_horizon(const ForwardingDataset& data) { return data.back().elapsed_hours - data.front().elapsed_hours; }

inline void append_residuals(std::vector<double>& out, std::span<const double> predicted, const ForwardingDataset& data) {
    for (std::size_t k = 0; k < data.size(); ++k) out.push_back(predicted[k] - data.observations[k].count);
}

} // namespace detail

/// Model-minus-data residuals of the stand-alone model for one series.
inline std::vector<double> residuals_phase1(const Phase1Params& params, const ForwardingDataset& data,
                                            double step = 0.01) {
    params.validate();
    data.validate();
    const auto traj = run_phase1(params, data.front().count, detail::series_horizon(data), step);
    std::vector<double> out;
    out.reserve(data.size());
    detail::append_residuals(out, traj.sample(&Phase1State::c1, data.times_since_first()), data);
    return out;
}

inline double ls_error_phase1(const Phase1Params& params, const ForwardingDataset& data, double step = 0.01) {
    return detail::sum_of_squares(residuals_phase1(params, data, step));
}

/// Long-interval objective: the new piece is posted `tau` hours into the
/// given phase-1 run; `data` is the new piece's own series.
inline std::vector<double> residuals_lti(const Phase2Params& params, const Trajectory<Phase1State>& phase1, double tau,
                                         const ForwardingDataset& data, double step = 0.01) {
    params.validate();
    data.validate();
    const LtiPhase2State start = handoff_lti(phase1, tau, params.s20, data.front().count);
    IntegrationConfig cfg;
    cfg.step = step;
    cfg.t_end = detail::series_horizon(data);
    const auto traj = integrate(LtiSystem{params}, start, cfg);
    std::vector<double> out;
    out.reserve(data.size());
    detail::append_residuals(out, traj.sample(&LtiPhase2State::c2, data.times_since_first()), data);
    return out;
}

inline double ls_error_lti(const Phase2Params& params, const Trajectory<Phase1State>& phase1, double tau,
                           const ForwardingDataset& data, double step = 0.01) {
    return detail::sum_of_squares(residuals_lti(params, phase1, tau, data, step));
}

/// Phase-1 run, handoff and joint short-interval run behind the joint
/// objective.
struct StiRun {
    Trajectory<Phase1State> phase1;   ///< [0, tau]
    Trajectory<StiPhase2State> joint; ///< local time, 0 = posting of the second piece
    double tau = 0.0;

    double c1_at(double t) const { return t < tau ? phase1.at(t).c1 : joint.at(t - tau).c1; }
};

/// Without `early`, `p1` drives the first piece over the whole run and the
/// joint state at tau is the plain handoff. With `early`, the stand-alone run
/// before tau uses `early`; after tau the first piece follows the rates of
/// `p1` and the shared susceptible pool restarts at `p1.s10`, the pool the
/// later-period calibration sees at the posting time.
inline StiRun run_sti(const Phase1Params& p1, const Phase2Params& p2, double tau, double seed_f1, double seed_f2,
                      double horizon_after_tau, double step = 0.01,
                      const std::optional<Phase1Params>& early = std::nullopt) {
    if (!(tau >= 0.0)) throw ValidationError("tau must be >= 0");
    p1.validate();
    p2.validate();
    if (early) early->validate();
    StiRun run;
    run.tau = tau;
    run.phase1 = run_phase1(early.value_or(p1), seed_f1, tau, step);
    IntegrationConfig cfg;
    cfg.step = step;
    cfg.t_end = std::max(horizon_after_tau, 0.0);
    StiPhase2State start = handoff_sti(run.phase1, tau, seed_f2);
    if (early) start.s1 = p1.s10;
    run.joint = integrate(StiSystem{p1, p2}, start, cfg);
    return run;
}

/// Joint residuals: first the old piece's series (dataA, aligned to its first
/// row), then the new piece's series (dataB, aligned to its first row, which
/// is the posting time tau). An empty dataB means no second piece.
inline std::vector<double> residuals_sti(const Phase1Params& p1, const Phase2Params& p2, double tau,
                                         const ForwardingDataset& dataA, const ForwardingDataset& dataB,
                                         double step = 0.01, const std::optional<Phase1Params>& early = std::nullopt) {
    p1.validate();
    p2.validate();
    if (early) early->validate();
    dataA.validate();
    if (!dataB.empty()) dataB.validate();
    const double horizon_a = detail::series_horizon(dataA);
    if (tau > horizon_a) throw ValidationError("tau lies beyond the first series");
    const double horizon_b = dataB.empty() ? 0.0 : detail::series_horizon(dataB);
    const double seed_f2 = dataB.empty() ? 0.0 : dataB.front().count;
    const StiRun run = run_sti(p1, p2, tau, dataA.front().count, seed_f2, std::max(horizon_a - tau, horizon_b), step, early);

    std::vector<double> out;
    out.reserve(dataA.size() + dataB.size());
    const auto ta = dataA.times_since_first();
    for (std::size_t k = 0; k < dataA.size(); ++k) out.push_back(run.c1_at(ta[k]) - dataA.observations[k].count);
    if (!dataB.empty()) detail::append_residuals(out, run.joint.sample(&StiPhase2State::c2, dataB.times_since_first()), dataB);
    return out;
}

inline double ls_error_sti(const Phase1Params& p1, const Phase2Params& p2, double tau, const ForwardingDataset& dataA,
                           const ForwardingDataset& dataB, double step = 0.01,
                           const std::optional<Phase1Params>& early = std::nullopt) {
    return detail::sum_of_squares(residuals_sti(p1, p2, tau, dataA, dataB, step, early));
}

// ---------------------------------------------------------------------------
// Free-parameter bookkeeping

enum class ParamId { beta1, p1, alpha1, s10, beta21, beta22, beta23, m21, m22, m23, p2, alpha2, s20 };

enum class ParamScale { log, linear };

struct ParamInfo {
    ParamId id;
    std::string_view name;
    ParamScale scale;
    double lower;
    double upper;
};

/// Symbol names and default box bounds.
inline constexpr std::array<ParamInfo, 13> param_table{{
    {ParamId::beta1, "beta1", ParamScale::log, 1e-8, 10.0},
    {ParamId::p1, "p1", ParamScale::linear, 1e-6, 1.0},
    {ParamId::alpha1, "alpha1", ParamScale::log, 1e-8, 10.0},
    {ParamId::s10, "s10", ParamScale::log, 1e2, 1e8},
    {ParamId::beta21, "beta21", ParamScale::log, 1e-8, 10.0},
    {ParamId::beta22, "beta22", ParamScale::log, 1e-8, 10.0},
    {ParamId::beta23, "beta23", ParamScale::log, 1e-8, 10.0},
    {ParamId::m21, "m21", ParamScale::log, 1e-4, 10.0},
    {ParamId::m22, "m22", ParamScale::log, 1e-4, 10.0},
    {ParamId::m23, "m23", ParamScale::log, 1e-4, 10.0},
    {ParamId::p2, "p2", ParamScale::linear, 1e-6, 1.0},
    {ParamId::alpha2, "alpha2", ParamScale::log, 1e-8, 10.0},
    {ParamId::s20, "s20", ParamScale::log, 1e2, 1e8},
}};

inline const ParamInfo& param_info(ParamId id) { return param_table[static_cast<std::size_t>(id)]; }

inline ParamId parse_param_id(std::string_view name) {
    for (const auto& info : param_table)
        if (info.name == name) return info.id;
    throw ValidationError("unknown parameter '" + std::string(name) + "'");
}

struct ParamBundle {
    Phase1Params phase1;
    Phase2Params phase2;

    double& operator[](ParamId id) {
        switch (id) {
        case ParamId::beta1: return phase1.beta1;
        case ParamId::p1: return phase1.p1;
        case ParamId::alpha1: return phase1.alpha1;
        case ParamId::s10: return phase1.s10;
        case ParamId::beta21: return phase2.beta21;
        case ParamId::beta22: return phase2.beta22;
        case ParamId::beta23: return phase2.beta23;
        case ParamId::m21: return phase2.m21;
        case ParamId::m22: return phase2.m22;
        case ParamId::m23: return phase2.m23;
        case ParamId::p2: return phase2.p2;
        case ParamId::alpha2: return phase2.alpha2;
        case ParamId::s20: return phase2.s20;
        }
        throw ValidationError("unknown parameter id");
    }
    double operator[](ParamId id) const { return const_cast<ParamBundle&>(*this)[id]; }
};

struct ParamBound {
    ParamId id;
    double lower;
    double upper;
};

inline ParamBound default_bound(ParamId id) {
    const auto& info = param_info(id);
    return {id, info.lower, info.upper};
}

inline std::vector<ParamBound> default_bounds(std::initializer_list<ParamId> ids) {
    std::vector<ParamBound> out;
    for (ParamId id : ids) out.push_back(default_bound(id));
    return out;
}

/// Free parameters of each model: the stand-alone set, the long-interval
/// phase-2 set, and the joint short-interval set.
inline std::vector<ParamId> theta_phase1() { return {ParamId::p1, ParamId::beta1, ParamId::alpha1, ParamId::s10}; }
inline std::vector<ParamId> theta_lti() {
    return {ParamId::beta21, ParamId::beta22, ParamId::beta23, ParamId::m21, ParamId::m22,
            ParamId::m23,    ParamId::p2,     ParamId::alpha2, ParamId::s20};
}
inline std::vector<ParamId> theta_sti() {
    return {ParamId::p1,  ParamId::beta1, ParamId::alpha1, ParamId::p2,  ParamId::beta21, ParamId::beta22,
            ParamId::beta23, ParamId::m21, ParamId::m22,    ParamId::m23, ParamId::alpha2, ParamId::s10};
}

/// Maps an unconstrained coordinate onto [lower, upper] through a logistic
/// squash, uniformly in log space for scale parameters.
struct BoundedTransform {
    ParamBound bound;
    ParamScale scale;

    double to_value(double y) const {
        const double u = 1.0 / (1.0 + std::exp(-y));
        if (scale == ParamScale::log) {
            const double lo = std::log(bound.lower), hi = std::log(bound.upper);
            return std::clamp(std::exp(lo + u * (hi - lo)), bound.lower, bound.upper);
        }
        return std::clamp(bound.lower + u * (bound.upper - bound.lower), bound.lower, bound.upper);
    }

    double to_search(double value) const {
        double u;
        if (scale == ParamScale::log) {
            const double lo = std::log(bound.lower), hi = std::log(bound.upper);
            u = (std::log(std::clamp(value, bound.lower, bound.upper)) - lo) / (hi - lo);
        } else {
            u = (std::clamp(value, bound.lower, bound.upper) - bound.lower) / (bound.upper - bound.lower);
        }
        u = std::clamp(u, 1e-9, 1.0 - 1e-9);
        return std::log(u / (1.0 - u));
    }

    double unit_to_search(double u) const {
        u = std::clamp(u, 1e-9, 1.0 - 1e-9);
        return std::log(u / (1.0 - u));
    }
};

// ---------------------------------------------------------------------------

struct FitSpec {
    ModelKind model = ModelKind::phase1;
    /// phase1: the series; lti: the new piece's series; sti: the old piece's series.
    ForwardingDataset data;
    /// sti only: the new piece's series, starting at its posting time.
    ForwardingDataset secondary;
    /// Values of every parameter that is not free.
    ParamBundle base;
    /// lti: stand-alone parameters before tau are base.phase1 with this seed.
    double phase1_seed = 0.0;
    /// sti: optional separate stand-alone parameters before tau.
    std::optional<Phase1Params> early_phase1;
    double tau = 0.0;
    std::vector<ParamBound> free;
    std::size_t restarts = 32;
    std::uint64_t seed = 1;
    /// First restart starts at the base values instead of an LHS point.
    bool start_from_base = false;
    NelderMeadOptions optimizer;
    /// Levenberg-Marquardt refinement of each restart's simplex result.
    bool polish = true;
    /// LM budget in residual evaluations per (free parameters + 1).
    std::size_t polish_evaluations = 100;
    /// When nonzero, each restart first runs a simplex of this many
    /// evaluations plus LM, then the full simplex from that point. Helps on
    /// long curved valleys where the full simplex stalls early.
    std::size_t probe_evaluations = 0;
    double step = 0.01;

    void validate() const {
        data.validate();
        if (model == ModelKind::sti && !secondary.empty()) secondary.validate();
        if (free.empty()) throw ValidationError("fit needs at least one free parameter");
        for (const auto& b : free) {
            if (!(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower <= b.upper))
                throw ValidationError("bounds for '" + std::string(param_info(b.id).name) + "' must be finite with lower <= upper");
            if (param_info(b.id).scale == ParamScale::log && !(b.lower > 0.0))
                throw ValidationError("bounds for '" + std::string(param_info(b.id).name) + "' must be positive");
        }
        if (restarts < 1) throw ValidationError("restarts must be >= 1");
        if (!(step > 0.0)) throw ValidationError("step must be > 0");
        if (model == ModelKind::lti && !(phase1_seed >= 0.0)) throw ValidationError("phase1_seed must be >= 0");
        if (!(tau >= 0.0)) throw ValidationError("tau must be >= 0");
    }
};

struct FitResult {
    ParamBundle best;
    double error = std::numeric_limits<double>::infinity();
    std::vector<double> restart_errors;
    std::vector<double> residuals;
    bool converged = false;
    std::size_t evaluations = 0;
    std::size_t failed_evaluations = 0;
};

/// Objective of a FitSpec at a full parameter bundle. Throws on invalid
/// parameters or failed integration.
class FitObjective {
public:
    explicit FitObjective(const FitSpec& spec) : spec_(spec) {
        spec_.validate();
        if (spec_.model == ModelKind::lti) {
            spec_.base.phase1.validate();
            phase1_ = run_phase1(spec_.base.phase1, spec_.phase1_seed, spec_.tau, spec_.step);
        }
    }

    std::vector<double> residuals(const ParamBundle& p) const {
        switch (spec_.model) {
        case ModelKind::phase1: return residuals_phase1(p.phase1, spec_.data, spec_.step);
        case ModelKind::lti: return residuals_lti(p.phase2, *phase1_, spec_.tau, spec_.data, spec_.step);
        case ModelKind::sti:
            return residuals_sti(p.phase1, p.phase2, spec_.tau, spec_.data, spec_.secondary, spec_.step, spec_.early_phase1);
        }
        throw ValidationError("unknown model");
    }

    double operator()(const ParamBundle& p) const { return detail::sum_of_squares(residuals(p)); }

    const FitSpec& spec() const { return spec_; }

private:
    FitSpec spec_;
    std::optional<Trajectory<Phase1State>> phase1_;
};

namespace detail {

/// Residuals as a function of the search-space point, for the LM refinement.
/// Failed evaluations return a flat penalty so the step is rejected.
struct SearchResiduals : Eigen::DenseFunctor<double> {
    std::function<std::vector<double>(const std::vector<double>&)> residuals;

    SearchResiduals(int inputs, int values, std::function<std::vector<double>(const std::vector<double>&)> r)
        : Eigen::DenseFunctor<double>(inputs, values), residuals(std::move(r)) {}

    int operator()(const InputType& x, ValueType& f) const {
        const std::vector<double> r = residuals(std::vector<double>(x.data(), x.data() + x.size()));
        if (r.size() != static_cast<std::size_t>(f.size())) {
            f.setConstant(1e12);
            return 0;
        }
        for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = r[static_cast<std::size_t>(i)];
        return 0;
    }
};

} // namespace detail

/// Multi-start Nelder-Mead in the bounded search space. Restart starting
/// points are a Latin hypercube over the box; the run is deterministic in
/// spec.seed.
inline FitResult fit(const FitSpec& spec) {
    const FitObjective objective(spec);
    const std::size_t dim = spec.free.size();
    std::vector<BoundedTransform> transforms;
    for (const auto& b : spec.free) transforms.push_back({b, param_info(b.id).scale});

    FitResult result;
    auto bundle_at = [&](const std::vector<double>& y) {
        ParamBundle p = spec.base;
        for (std::size_t i = 0; i < dim; ++i) p[spec.free[i].id] = transforms[i].to_value(y[i]);
        return p;
    };
    auto evaluate = [&](const std::vector<double>& y) {
        try {
            return objective(bundle_at(y));
        } catch (const ValidationError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const NumericalError&) {
            ++result.failed_evaluations;
            return std::numeric_limits<double>::infinity();
        }
    };

    const std::size_t residual_count = spec.data.size() + (spec.model == ModelKind::sti ? spec.secondary.size() : 0);
    auto residuals_at = [&](const std::vector<double>& y) -> std::vector<double> {
        try {
            return objective.residuals(bundle_at(y));
        } catch (const ValidationError&) {
        } catch (const NumericalError&) {
        }
        return {};
    };
    auto polish = [&](NelderMeadResult& nm) {
        detail::SearchResiduals f(static_cast<int>(dim), static_cast<int>(residual_count), residuals_at);
        Eigen::NumericalDiff<detail::SearchResiduals> diff(f);
        Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::SearchResiduals>> lm(diff);
        lm.setMaxfev(static_cast<Eigen::Index>(spec.polish_evaluations * (dim + 1)));
        Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(nm.x.data(), static_cast<Eigen::Index>(dim));
        lm.minimize(y);
        nm.evaluations += static_cast<std::size_t>(lm.nfev()) * (dim + 1);
        const std::vector<double> candidate(y.data(), y.data() + y.size());
        const double value = evaluate(candidate);
        if (value < nm.value) {
            nm.value = value;
            nm.x = candidate;
        }
    };

    std::mt19937_64 rng(spec.seed);
    const Eigen::MatrixXd starts = lhs_unit(spec.restarts, dim, rng);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> best_y;
    for (std::size_t r = 0; r < spec.restarts; ++r) {
        std::vector<double> y0(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            y0[i] = (r == 0 && spec.start_from_base)
                        ? transforms[i].to_search(spec.base[spec.free[i].id])
                        : transforms[i].unit_to_search(starts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)));
        }
        // A simplex anchored at an infeasible point cannot move, so redraw
        // uniformly until the start evaluates.
        for (std::size_t attempt = 0; attempt < 200 && !std::isfinite(evaluate(y0)); ++attempt)
            for (std::size_t i = 0; i < dim; ++i) y0[i] = transforms[i].unit_to_search(unit(rng));
        std::size_t probe_cost = 0;
        if (spec.probe_evaluations > 0) {
            NelderMeadOptions probe = spec.optimizer;
            probe.max_evaluations = spec.probe_evaluations;
            NelderMeadResult first = nelder_mead(evaluate, y0, probe);
            if (spec.polish && std::isfinite(first.value)) polish(first);
            probe_cost = first.evaluations;
            y0 = first.x;
        }
        NelderMeadResult nm = nelder_mead(evaluate, y0, spec.optimizer);
        if (spec.polish && std::isfinite(nm.value)) polish(nm);
        nm.evaluations += probe_cost;
        result.evaluations += nm.evaluations;
        result.restart_errors.push_back(nm.value);
        result.converged = result.converged || (nm.converged && std::isfinite(nm.value));
        if (nm.value < result.error) {
            result.error = nm.value;
            best_y = nm.x;
        }
    }

    if (best_y.empty()) {
        result.best = spec.base;
        return result;
    }
    result.best = bundle_at(best_y);
    result.residuals = objective.residuals(result.best);
    result.error = detail::sum_of_squares(result.residuals);
    return result;
}

} // namespace dtsfi
