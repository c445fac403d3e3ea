#pragma once

// Global sensitivity of the phase-2 indices: Latin hypercube design over the
// nine phase-2 inputs and partial rank correlation coefficients (PRCC).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtsfi/error.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/indices.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/lhs.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi {

/// Ranks starting at 1; tied values share the average of their ranks.
inline std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

struct PrccColumn {
    std::vector<std::optional<double>> values; ///< one per parameter; empty when undefined
    std::size_t used = 0;                      ///< rows with a defined output
};

namespace detail {

inline Eigen::VectorXd residualize(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    if (design.cols() == 0) return y;
    const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
    return y - design * coef;
}

inline double centered_norm(const Eigen::VectorXd& v) { return (v.array() - v.mean()).matrix().norm(); }

} // namespace detail

/// PRCC of each sample column against `outputs`. Rows whose output is empty
/// are dropped. `active` (optional) restricts which columns enter the
/// regressions; inactive columns get an empty result.
inline PrccColumn prcc(const Eigen::MatrixXd& samples, std::span<const std::optional<double>> outputs,
                       std::span<const bool> active = {}) {
    const auto k = static_cast<std::size_t>(samples.cols());
    if (static_cast<std::size_t>(samples.rows()) != outputs.size())
        throw ValidationError("prcc: samples and outputs must have the same number of rows");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < outputs.size(); ++i)
        if (outputs[i] && std::isfinite(*outputs[i])) keep.push_back(i);

    std::vector<std::size_t> columns;
    for (std::size_t j = 0; j < k; ++j)
        if (active.empty() || active[j]) columns.push_back(j);

    PrccColumn out;
    out.values.assign(k, std::nullopt);
    out.used = keep.size();
    if (keep.size() < k + 2)
        throw InsufficientDataError("prcc: " + std::to_string(keep.size()) + " defined outputs, need at least " +
                                    std::to_string(k + 2));

    const auto m = static_cast<Eigen::Index>(keep.size());
    const auto p = static_cast<Eigen::Index>(columns.size());
    Eigen::MatrixXd ranks(m, p);
    std::vector<double> buffer(keep.size());
    for (Eigen::Index c = 0; c < p; ++c) {
        for (std::size_t r = 0; r < keep.size(); ++r)
            buffer[r] = samples(static_cast<Eigen::Index>(keep[r]), static_cast<Eigen::Index>(columns[static_cast<std::size_t>(c)]));
        const auto rk = average_ranks(buffer);
        for (Eigen::Index r = 0; r < m; ++r) ranks(r, c) = rk[static_cast<std::size_t>(r)];
    }
    for (std::size_t r = 0; r < keep.size(); ++r) buffer[r] = *outputs[keep[r]];
    const auto ry = average_ranks(buffer);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ry.data(), m);
    if (detail::centered_norm(y) == 0.0) return out;

    for (Eigen::Index c = 0; c < p; ++c) {
        Eigen::MatrixXd design(m, p);
        design.col(0).setOnes();
        Eigen::Index col = 1;
        for (Eigen::Index o = 0; o < p; ++o)
            if (o != c) design.col(col++) = ranks.col(o);
        const Eigen::VectorXd rx = detail::residualize(design, ranks.col(c));
        const Eigen::VectorXd rr = detail::residualize(design, y);
        const double nx = rx.norm(), ny = rr.norm();
        if (nx <= 1e-12 * detail::centered_norm(ranks.col(c)) || ny <= 1e-12 * detail::centered_norm(y)) continue;
        out.values[columns[static_cast<std::size_t>(c)]] = std::clamp(rx.dot(rr) / (nx * ny), -1.0, 1.0);
    }
    return out;
}

// ---------------------------------------------------------------------------

enum class IndexId { r0, f2max, c2_final, t2b, t2i, t2max, v2o, v2d };

inline constexpr std::array<IndexId, 8> all_indices{IndexId::r0,  IndexId::f2max, IndexId::c2_final, IndexId::t2b,
                                                    IndexId::t2i, IndexId::t2max, IndexId::v2o,      IndexId::v2d};

inline constexpr std::array<std::string_view, 8> index_names{"r0",  "f2max", "c2_final", "t2b",
                                                             "t2i", "t2max", "v2o",      "v2d"};

inline std::string_view to_string(IndexId id) { return index_names[static_cast<std::size_t>(id)]; }

inline std::optional<double> index_value(const IndexReport& r, IndexId id) {
    switch (id) {
    case IndexId::r0: return r.r0;
    case IndexId::f2max: return r.f2max;
    case IndexId::c2_final: return r.c2_final;
    case IndexId::t2b: return r.t2b;
    case IndexId::t2i: return r.t2i;
    case IndexId::t2max: return r.t2max;
    case IndexId::v2o: return r.v2o;
    case IndexId::v2d: return r.v2d;
    }
    return std::nullopt;
}

/// Sampled phase-2 inputs, in table row order. The last row is the
/// susceptible pool met by the new piece at posting: S20 for the long
/// interval model, the shared S1(tau) for the short interval model.
enum class SensitivityParam { beta21, beta22, beta23, p2, alpha2, m21, m22, m23, s0 };

inline constexpr std::size_t sensitivity_param_count = 9;

inline std::array<std::string, sensitivity_param_count> sensitivity_param_names(ModelKind model) {
    return {"beta21", "beta22", "beta23", "p2", "alpha2", "m21", "m22", "m23", model == ModelKind::sti ? "s10" : "s20"};
}

/// Context that stays fixed across samples: the phase-1 state at posting,
/// the first piece's rates (STI), the seed and horizon of each run.
struct SensitivityScenario {
    ModelKind model = ModelKind::lti;
    Phase1Params phase1;        ///< first-piece rates used by the STI field
    Phase1State at_posting;     ///< phase-1 state at tau
    double seed_f2 = 1.0;
    double horizon = 26.0;      ///< hours after posting
    double step = 0.01;
    double threshold_fraction = 0.05; ///< F2* as a fraction of the baseline peak
};

inline SensitivityScenario make_scenario(ModelKind model, const Phase1Params& phase1, const Trajectory<Phase1State>& traj,
                                         double tau, double seed_f2, double horizon = 26.0) {
    if (model == ModelKind::phase1) throw ValidationError("sensitivity needs a phase-2 model");
    SensitivityScenario s;
    s.model = model;
    s.phase1 = phase1;
    s.at_posting = traj.at(tau);
    s.seed_f2 = seed_f2;
    s.horizon = horizon;
    return s;
}

/// Scenario and baseline inputs for a posting at `tau` after a phase-1 run
/// from `seed_f1`. With `early`, the stand-alone run before tau uses `early`
/// and the shared pool at posting restarts at `p1.s10`, as in the joint fit.
struct SensitivityBaseline {
    SensitivityScenario scenario;
    Phase2Params phase2;
    double s0 = 0.0; ///< S20 (LTI) or the shared S1 at posting (STI)
};

inline SensitivityBaseline posting_baseline(ModelKind model, const Phase1Params& p1, const Phase2Params& p2, double tau,
                                            double seed_f1, double seed_f2,
                                            const std::optional<Phase1Params>& early = std::nullopt,
                                            double horizon = 26.0) {
    const auto traj = run_phase1(early.value_or(p1), seed_f1, tau);
    SensitivityBaseline b{make_scenario(model, p1, traj, tau, seed_f2, horizon), p2, 0.0};
    if (early) b.scenario.at_posting.s1 = p1.s10;
    b.s0 = model == ModelKind::sti ? b.scenario.at_posting.s1 : p2.s20;
    return b;
}

/// Baseline value of each sampled input. For STI the susceptible row is the
/// pool at posting (`s0`), which the caller supplies.
inline std::array<double, sensitivity_param_count> sensitivity_values(const Phase2Params& p, double s0) {
    return {p.beta21, p.beta22, p.beta23, p.p2, p.alpha2, p.m21, p.m22, p.m23, s0};
}

inline Phase2Params apply_sample(Phase2Params p, std::span<const double> row, double& s0) {
    p.beta21 = row[0];
    p.beta22 = row[1];
    p.beta23 = row[2];
    p.p2 = row[3];
    p.alpha2 = row[4];
    p.m21 = row[5];
    p.m22 = row[6];
    p.m23 = row[7];
    s0 = row[8];
    p.s20 = row[8];
    return p;
}

/// Symmetric relative box around the baseline, probabilities capped at 1.
inline SamplingPlan relative_plan(ModelKind model, const Phase2Params& baseline, double s0, double factor = 0.5,
                                  std::size_t samples = 1000, std::uint64_t seed = 1) {
    SamplingPlan plan;
    plan.samples = samples;
    plan.seed = seed;
    const auto names = sensitivity_param_names(model);
    const auto values = sensitivity_values(baseline, s0);
    for (std::size_t i = 0; i < sensitivity_param_count; ++i) {
        double hi = (1.0 + factor) * values[i];
        if (i == static_cast<std::size_t>(SensitivityParam::p2)) hi = std::min(hi, 1.0);
        plan.ranges.push_back({names[i], (1.0 - factor) * values[i], hi});
    }
    return plan;
}

struct PrccTable {
    ModelKind model = ModelKind::lti;
    std::vector<std::string> parameters;
    std::vector<std::string> indices;
    /// values[param][index]
    std::vector<std::vector<std::optional<double>>> values;
    /// defined outputs per index
    std::vector<std::size_t> used;
    std::vector<bool> insufficient_variance;
    std::size_t samples = 0;
    std::size_t failed_runs = 0;  ///< integration failures
    std::size_t inadmissible = 0; ///< rows outside the parameter domain (m2i * p2 > 1), skipped
    double threshold_f2star = 0.0;

    // Scatter data for plots.
    Eigen::MatrixXd design;
    std::vector<std::vector<std::optional<double>>> outputs; ///< outputs[index][sample]

    std::optional<double> at(std::size_t param, IndexId index) const {
        return values[param][static_cast<std::size_t>(index)];
    }
};

namespace detail {

inline IndexReport run_sample(const SensitivityScenario& sc, const Phase2Params& p2, double s0, double f2star) {
    IntegrationConfig cfg;
    cfg.step = sc.step;
    cfg.t_end = sc.horizon;
    const auto& a = sc.at_posting;
    if (sc.model == ModelKind::lti) {
        const LtiSystem sys{p2};
        const LtiPhase2State start{s0, a.i1_plus, a.i1_minus, sc.seed_f2, 0.0, sc.seed_f2};
        IndexReport r = extract_indices(integrate(sys, start, cfg), f2star);
        r.r0 = r0_at_posting(sys, start);
        return r;
    }
    const StiSystem sys{sc.phase1, p2};
    const StiPhase2State start{s0, a.f1, a.i1_plus, a.i1_minus, sc.seed_f2, 0.0, a.c1, sc.seed_f2};
    IndexReport r = extract_indices(integrate(sys, start, cfg), f2star);
    r.r0 = r0_at_posting(sys, start);
    return r;
}

} // namespace detail

/// Runs the phase-2 model once per LHS row and tabulates the PRCC of every
/// input against every index. The outbreak threshold F2* is fixed across
/// samples at `threshold_fraction` of the baseline run's peak; samples that
/// never reach it have undefined time indices and are dropped per column.
inline PrccTable run_sensitivity(const SensitivityScenario& scenario, const Phase2Params& baseline,
                                 double baseline_s0, const SamplingPlan& plan) {
    if (scenario.model == ModelKind::phase1) throw ValidationError("sensitivity needs a phase-2 model");
    plan.validate();
    if (plan.ranges.size() != sensitivity_param_count)
        throw ValidationError("sampling plan must cover the nine phase-2 inputs");

    PrccTable table;
    table.model = scenario.model;
    for (const auto& r : plan.ranges) table.parameters.push_back(r.name);
    for (auto name : index_names) table.indices.emplace_back(name);
    table.samples = plan.samples;

    const IndexReport base = detail::run_sample(scenario, baseline, baseline_s0, 0.0);
    table.threshold_f2star = scenario.threshold_fraction * base.f2max;

    table.design = lhs_sample(plan);
    table.outputs.assign(all_indices.size(), std::vector<std::optional<double>>(plan.samples));
    std::vector<double> row(sensitivity_param_count);
    for (std::size_t i = 0; i < plan.samples; ++i) {
        for (std::size_t j = 0; j < sensitivity_param_count; ++j)
            row[j] = table.design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        double s0 = 0.0;
        const Phase2Params p = apply_sample(baseline, row, s0);
        try {
            p.validate();
        } catch (const ValidationError&) {
            ++table.inadmissible;
            continue;
        }
        try {
            const IndexReport r = detail::run_sample(scenario, p, s0, table.threshold_f2star);
            for (std::size_t k = 0; k < all_indices.size(); ++k) table.outputs[k][i] = index_value(r, all_indices[k]);
        } catch (const NumericalError&) {
            ++table.failed_runs;
        }
    }
    if (table.failed_runs * 5 > plan.samples - table.inadmissible)
        throw NumericalError("sensitivity run aborted: " + std::to_string(table.failed_runs) + " of " +
                             std::to_string(plan.samples) + " runs failed");

    std::array<bool, sensitivity_param_count> active{};
    table.insufficient_variance.resize(sensitivity_param_count);
    for (std::size_t j = 0; j < sensitivity_param_count; ++j) {
        const auto& r = plan.ranges[j];
        const double scale = std::max(std::abs(r.lower), std::abs(r.upper));
        active[j] = (r.upper - r.lower) > 1e-9 * scale;
        table.insufficient_variance[j] = !active[j];
    }

    table.values.assign(sensitivity_param_count, std::vector<std::optional<double>>(all_indices.size()));
    table.used.assign(all_indices.size(), 0);
    const bool any_active = std::find(active.begin(), active.end(), true) != active.end();
    for (std::size_t k = 0; k < all_indices.size(); ++k) {
        const auto& col = table.outputs[k];
        table.used[k] = static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](const auto& v) { return v.has_value(); }));
        if (!any_active) continue;
        try {
            const PrccColumn c = prcc(table.design, col, active);
            for (std::size_t j = 0; j < sensitivity_param_count; ++j) table.values[j][k] = c.values[j];
        } catch (const InsufficientDataError&) {
            // left undefined; `used` records why
        }
    }
    return table;
}

} // namespace dtsfi
