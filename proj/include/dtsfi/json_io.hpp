#pragma once

// JSON forms of parameters, fit specifications and results, and the CSV form
// of trajectories. Parameter objects use the symbol names as keys (beta1,
// p1, alpha1, s10, beta21, ...); undefined indices serialize as null.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtsfi/dataset.hpp"
#include "dtsfi/error.hpp"
#include "dtsfi/estimation.hpp"
#include "dtsfi/indices.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/models.hpp"

namespace dtsfi {

using json = nlohmann::json;

namespace detail {

inline double required_number(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing parameter '") + key + "'");
    if (!j.at(key).is_number()) throw ValidationError(std::string("parameter '") + key + "' must be a number");
    return j.at(key).get<double>();
}

inline json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> optional_from_json(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

} // namespace detail

inline json to_json(const Phase1Params& p) {
    return {{"beta1", p.beta1}, {"p1", p.p1}, {"alpha1", p.alpha1}, {"s10", p.s10}};
}

inline json to_json(const Phase2Params& p) {
    return {{"beta21", p.beta21}, {"beta22", p.beta22}, {"beta23", p.beta23}, {"m21", p.m21}, {"m22", p.m22},
            {"m23", p.m23},       {"p2", p.p2},         {"alpha2", p.alpha2}, {"s20", p.s20}};
}

inline Phase1Params phase1_from_json(const json& j) {
    const Phase1Params p{detail::required_number(j, "beta1"), detail::required_number(j, "p1"),
                         detail::required_number(j, "alpha1"), detail::required_number(j, "s10")};
    p.validate();
    return p;
}

inline Phase2Params phase2_from_json(const json& j) {
    Phase2Params p;
    p.beta21 = detail::required_number(j, "beta21");
    p.beta22 = detail::required_number(j, "beta22");
    p.beta23 = detail::required_number(j, "beta23");
    p.m21 = detail::required_number(j, "m21");
    p.m22 = detail::required_number(j, "m22");
    p.m23 = detail::required_number(j, "m23");
    p.p2 = detail::required_number(j, "p2");
    p.alpha2 = detail::required_number(j, "alpha2");
    p.s20 = j.contains("s20") ? detail::required_number(j, "s20") : 0.0;
    p.validate();
    return p;
}

inline json to_json(const ParamBundle& p) {
    json j = to_json(p.phase1);
    j.update(to_json(p.phase2));
    return j;
}

/// A parameter file: a flat object with whichever symbols the model needs,
/// plus optional scenario keys (tau, seed_f1, seed_f2).
struct ParameterFile {
    json raw;

    bool has_phase1() const { return raw.contains("beta1"); }
    bool has_phase2() const { return raw.contains("beta21"); }
    Phase1Params phase1() const { return phase1_from_json(raw); }
    Phase2Params phase2() const { return phase2_from_json(raw); }
    std::optional<double> number(const char* key) const { return detail::optional_from_json(raw, key); }
};

inline ParameterFile parse_parameter_file(std::istream& in) {
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ValidationError("parameter file must hold a JSON object");
        return {std::move(j)};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed parameter file: ") + e.what());
    }
}

inline json to_json(const IndexReport& r) {
    return {{"r0", detail::optional_to_json(r.r0)},
            {"f2max", r.f2max},
            {"t2max", r.t2max},
            {"c2_final", r.c2_final},
            {"final_size_converged", r.final_size_converged},
            {"t2b", detail::optional_to_json(r.t2b)},
            {"t2e", detail::optional_to_json(r.t2e)},
            {"t2i", detail::optional_to_json(r.t2i)},
            {"v2o", detail::optional_to_json(r.v2o)},
            {"v2d", detail::optional_to_json(r.v2d)},
            {"threshold_f2star", r.threshold_f2star}};
}

inline IndexReport index_report_from_json(const json& j) {
    IndexReport r;
    r.r0 = detail::optional_from_json(j, "r0");
    r.f2max = j.at("f2max").get<double>();
    r.t2max = j.at("t2max").get<double>();
    r.c2_final = j.at("c2_final").get<double>();
    r.final_size_converged = j.value("final_size_converged", true);
    r.t2b = detail::optional_from_json(j, "t2b");
    r.t2e = detail::optional_from_json(j, "t2e");
    r.t2i = detail::optional_from_json(j, "t2i");
    r.v2o = detail::optional_from_json(j, "v2o");
    r.v2d = detail::optional_from_json(j, "v2d");
    r.threshold_f2star = j.value("threshold_f2star", 0.0);
    return r;
}

inline json to_json(const FitResult& r, ModelKind model) {
    json best = json::object();
    switch (model) {
    case ModelKind::phase1: best = to_json(r.best.phase1); break;
    case ModelKind::lti: best = to_json(r.best.phase2); break;
    case ModelKind::sti: best = to_json(r.best); break;
    }
    json error = std::isfinite(r.error) ? json(r.error) : json(nullptr);
    json restarts = json::array();
    for (double e : r.restart_errors) restarts.push_back(std::isfinite(e) ? json(e) : json(nullptr));
    return {{"model", std::string(to_string(model))},
            {"best", best},
            {"error", error},
            {"restart_errors", restarts},
            {"residuals", r.residuals},
            {"converged", r.converged},
            {"evaluations", r.evaluations},
            {"failed_evaluations", r.failed_evaluations}};
}

/// Fit specification file. Keys: model, free (list of symbol names or
/// {name, lower, upper} objects; default: the model's full parameter set),
/// base (parameter object), tau, phase1_seed, early (phase-1 object),
/// restarts, seed, step, start_from_base, max_evaluations, polish,
/// polish_evaluations, probe_evaluations.
inline FitSpec fit_spec_from_json(const json& j, ForwardingDataset data, ForwardingDataset secondary = {}) {
    try {
        FitSpec spec;
        spec.model = parse_model_kind(j.at("model").get<std::string>());
        spec.data = std::move(data);
        spec.secondary = std::move(secondary);
        if (j.contains("base")) {
            const json& b = j.at("base");
            if (b.contains("beta1")) spec.base.phase1 = phase1_from_json(b);
            if (b.contains("beta21")) spec.base.phase2 = phase2_from_json(b);
        }
        if (j.contains("early")) spec.early_phase1 = phase1_from_json(j.at("early"));
        spec.tau = j.value("tau", 0.0);
        spec.phase1_seed = j.value("phase1_seed", 0.0);
        spec.restarts = j.value("restarts", std::size_t{32});
        spec.seed = j.value("seed", std::uint64_t{1});
        spec.step = j.value("step", 0.01);
        spec.start_from_base = j.value("start_from_base", false);
        spec.optimizer.max_evaluations = j.value("max_evaluations", spec.optimizer.max_evaluations);
        spec.polish = j.value("polish", spec.polish);
        spec.polish_evaluations = j.value("polish_evaluations", spec.polish_evaluations);
        spec.probe_evaluations = j.value("probe_evaluations", spec.probe_evaluations);
        if (j.contains("free")) {
            for (const auto& f : j.at("free")) {
                if (f.is_string()) {
                    spec.free.push_back(default_bound(parse_param_id(f.get<std::string>())));
                } else {
                    ParamBound b = default_bound(parse_param_id(f.at("name").get<std::string>()));
                    b.lower = f.value("lower", b.lower);
                    b.upper = f.value("upper", b.upper);
                    spec.free.push_back(b);
                }
            }
        } else {
            const auto ids = spec.model == ModelKind::phase1 ? theta_phase1()
                             : spec.model == ModelKind::lti  ? theta_lti()
                                                             : theta_sti();
            for (ParamId id : ids) spec.free.push_back(default_bound(id));
        }
        return spec;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed fit specification: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Trajectory CSV: header "t,<component names>", one row per node.

template <class State>
void write_trajectory(std::ostream& out, const Trajectory<State>& traj) {
    using L = StateLayout<State>;
    out << 't';
    for (auto name : L::names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << detail::format_number(traj.times[i]);
        for (double v : L::pack(traj.states[i])) out << ',' << detail::format_number(v);
        out << '\n';
    }
}

/// Reads the columns needed for index extraction from any trajectory CSV.
/// A file without f2/c2 columns yields zero series.
inline ForwardingSeries read_forwarding_series(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("trajectory file is empty");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        for (std::string cell; std::getline(hs, cell, ',');) header.emplace_back(detail::trim(cell));
    }
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    const auto ct = column("t");
    if (!ct) throw ValidationError("trajectory file needs a 't' column");
    const auto cf = column("f2");
    const auto cc = column("c2");

    ForwardingSeries series;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            cells.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (cells.size() != header.size())
            throw ValidationError("trajectory line " + std::to_string(line_no) + ": wrong number of fields");
        const std::string where = "trajectory line " + std::to_string(line_no);
        const double t = detail::parse_number(cells[*ct], where);
        if (!series.times.empty() && !(t > series.times.back()))
            throw ValidationError(where + ": times must increase strictly");
        series.times.push_back(t);
        series.f2.push_back(cf ? detail::parse_number(cells[*cf], where) : 0.0);
        series.c2.push_back(cc ? detail::parse_number(cells[*cc], where) : 0.0);
    }
    if (series.times.empty()) throw ValidationError("trajectory file has no rows");
    return series;
}

} // namespace dtsfi
