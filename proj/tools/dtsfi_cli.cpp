// Command-line front end: simulate, fit, indices, prcc, delay-scan.
//
// Exit status 0 on success, 1 on invalid input, 2 on numerical failure.
// Errors are written to stderr as a single JSON object.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtsfi/dtsfi.hpp"

namespace fs = std::filesystem;
using namespace dtsfi;

namespace {

void report_error(std::string_view kind, std::string_view message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    return out;
}

ParameterFile load_params(const std::string& path) {
    auto in = open_input(path);
    return parse_parameter_file(in);
}

ForwardingDataset load_dataset(const std::string& path) {
    auto in = open_input(path);
    return parse_dataset(in, fs::path(path).stem().string());
}

std::optional<Phase1Params> early_of(const ParameterFile& pf) {
    if (!pf.raw.contains("early")) return std::nullopt;
    return phase1_from_json(pf.raw.at("early"));
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    auto out = open_output(path);
    out << text;
}

template <class State>
void emit_trajectory(const Trajectory<State>& traj, const std::string& out_path, const std::string& svg_path,
                     const std::string& title) {
    std::ostringstream csv;
    write_trajectory(csv, traj);
    write_text(out_path, csv.str());
    if (svg_path.empty()) return;
    using L = StateLayout<State>;
    std::vector<svg::Series> series;
    for (std::size_t c = 0; c < L::size; ++c) {
        const std::string_view name = L::names[c];
        if (name != "f1" && name != "f2" && name != "c1" && name != "c2") continue;
        svg::Series s{std::string(name), traj.times, {}};
        for (const auto& st : traj.states) s.y.push_back(L::pack(st)[c]);
        series.push_back(std::move(s));
    }
    auto out = open_output(svg_path);
    svg::line_chart(out, series, {.title = title, .x_label = "hours", .y_label = "users"});
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string model = "phase1";
    std::string params;
    double t_end = 26.0;
    double step = 0.01;
    std::size_t record_every = 1;
    std::optional<double> tau, seed_f1, seed_f2;
    std::string out = "-";
    std::string svg;
};

int run_simulate(const SimulateArgs& a) {
    const ModelKind model = parse_model_kind(a.model);
    const ParameterFile pf = load_params(a.params);
    const Phase1Params p1 = pf.phase1();
    const double seed_f1 = a.seed_f1.value_or(pf.number("seed_f1").value_or(1.0));
    IntegrationConfig cfg;
    cfg.step = a.step;
    cfg.record_every = a.record_every;

    if (model == ModelKind::phase1) {
        cfg.t_end = a.t_end;
        emit_trajectory(integrate(Phase1System{p1}, initial_phase1(p1, seed_f1), cfg), a.out, a.svg, "phase 1");
        return 0;
    }
    const Phase2Params p2 = pf.phase2();
    const double tau = a.tau.value_or(pf.number("tau").value_or(0.0));
    const double seed_f2 = a.seed_f2.value_or(pf.number("seed_f2").value_or(1.0));
    cfg.t_end = a.t_end;
    if (model == ModelKind::lti) {
        const auto phase1 = run_phase1(p1, seed_f1, tau, a.step);
        emit_trajectory(integrate(LtiSystem{p2}, handoff_lti(phase1, tau, p2.s20, seed_f2), cfg), a.out, a.svg,
                        "long interval, hours after posting");
        return 0;
    }
    const auto early = early_of(pf);
    const StiRun run = run_sti(p1, p2, tau, seed_f1, seed_f2, a.t_end, a.step, early);
    emit_trajectory(run.joint, a.out, a.svg, "short interval, hours after posting");
    return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string spec;
    std::string data;
    std::string secondary;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> restarts;
    std::string out = "-";
    std::string svg;
};

int run_fit(const FitArgs& a) {
    json spec_json;
    {
        auto in = open_input(a.spec);
        try {
            spec_json = json::parse(in);
        } catch (const json::exception& e) {
            throw ValidationError(std::string("malformed fit specification: ") + e.what());
        }
    }
    FitSpec spec = fit_spec_from_json(spec_json, load_dataset(a.data),
                                      a.secondary.empty() ? ForwardingDataset{} : load_dataset(a.secondary));
    if (a.seed) spec.seed = *a.seed;
    if (a.restarts) spec.restarts = *a.restarts;
    if (spec.model == ModelKind::lti && spec.phase1_seed == 0.0)
        throw ValidationError("long-interval fits need 'phase1_seed' (the first piece's seed forwarders)");
    const FitResult r = fit(spec);
    if (!std::isfinite(r.error)) throw NumericalError("every restart failed to produce a finite objective");
    write_text(a.out, to_json(r, spec.model).dump(2) + "\n");

    if (!a.svg.empty()) {
        svg::Series data{"data", {}, {}}, model{"model", {}, {}};
        auto add = [&](const ForwardingDataset& ds, std::size_t offset, double shift) {
            const auto t = ds.times_since_first();
            for (std::size_t k = 0; k < ds.size(); ++k) {
                data.x.push_back(t[k] + shift);
                data.y.push_back(ds.observations[k].count);
                model.x.push_back(t[k] + shift);
                model.y.push_back(ds.observations[k].count + r.residuals[offset + k]);
            }
        };
        add(spec.data, 0, 0.0);
        std::vector<svg::Series> series{data, model};
        if (spec.model == ModelKind::sti && !spec.secondary.empty()) {
            data = {"data (second piece)", {}, {}};
            model = {"model (second piece)", {}, {}};
            add(spec.secondary, spec.data.size(), spec.tau);
            series.push_back(data);
            series.push_back(model);
        }
        auto out = open_output(a.svg);
        svg::line_chart(out, series, {.title = "fit", .x_label = "hours", .y_label = "cumulative forwards"});
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct IndicesArgs {
    std::string trajectory;
    std::optional<double> f2star;
    double fraction = 0.05;
    std::string out = "-";
};

int run_indices(const IndicesArgs& a) {
    auto in = open_input(a.trajectory);
    const ForwardingSeries series = read_forwarding_series(in);
    const IndexReport r = a.f2star ? extract_indices(series, *a.f2star) : extract_indices_relative(series, a.fraction);
    write_text(a.out, to_json(r).dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------

struct PrccArgs {
    std::string model = "lti";
    std::string params;
    std::size_t samples = 1000;
    double factor = 0.5;
    std::uint64_t seed = 1;
    double horizon = 26.0;
    double step = 0.01;
    std::optional<double> tau;
    std::string out_dir = "prcc";
};

int run_prcc(const PrccArgs& a) {
    const ModelKind model = parse_model_kind(a.model);
    if (model == ModelKind::phase1) throw ValidationError("prcc needs --model lti or sti");
    if (!(a.factor > 0.0 && a.factor < 1.0)) throw ValidationError("--factor must lie in (0, 1)");
    if (!(a.step > 0.0)) throw ValidationError("--step must be > 0");
    const ParameterFile pf = load_params(a.params);
    const double tau = a.tau.value_or(pf.number("tau").value_or(0.0));
    const auto base = posting_baseline(model, pf.phase1(), pf.phase2(), tau, pf.number("seed_f1").value_or(1.0),
                                       pf.number("seed_f2").value_or(1.0), early_of(pf), a.horizon);
    SensitivityScenario scenario = base.scenario;
    scenario.step = a.step;
    const SamplingPlan plan = relative_plan(model, base.phase2, base.s0, a.factor, a.samples, a.seed);
    const PrccTable table = run_sensitivity(scenario, base.phase2, base.s0, plan);

    const fs::path dir(a.out_dir);
    auto cell = [](const std::optional<double>& v) { return v ? detail::format_number(*v) : std::string(); };
    {
        auto out = open_output(dir / "prcc.csv");
        out << "parameter";
        for (const auto& name : table.indices) out << ',' << name;
        out << '\n';
        for (std::size_t j = 0; j < table.parameters.size(); ++j) {
            out << table.parameters[j];
            for (std::size_t k = 0; k < table.indices.size(); ++k) out << ',' << cell(table.values[j][k]);
            out << '\n';
        }
        out << "used";
        for (std::size_t u : table.used) out << ',' << u;
        out << '\n';
    }
    for (std::size_t k = 0; k < table.indices.size(); ++k) {
        const std::string& index = table.indices[k];
        {
            auto out = open_output(dir / ("scatter_" + index + ".csv"));
            for (const auto& p : table.parameters) out << p << ',';
            out << index << '\n';
            for (std::size_t i = 0; i < table.samples; ++i) {
                for (std::size_t j = 0; j < table.parameters.size(); ++j)
                    out << detail::format_number(table.design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
                        << ',';
                out << cell(table.outputs[k][i]) << '\n';
            }
        }
        std::vector<svg::Bar> bars;
        std::size_t strongest = 0;
        double strongest_abs = -1.0;
        for (std::size_t j = 0; j < table.parameters.size(); ++j) {
            const auto v = table.values[j][k];
            bars.push_back({table.parameters[j], v.value_or(std::nan(""))});
            if (v && std::abs(*v) > strongest_abs) {
                strongest_abs = std::abs(*v);
                strongest = j;
            }
        }
        {
            auto out = open_output(dir / ("prcc_" + index + ".svg"));
            svg::bar_chart(out, bars, {.title = "PRCC, " + index, .y_label = "PRCC"});
        }
        if (strongest_abs >= 0.0) {
            svg::Series pts{"", {}, {}};
            for (std::size_t i = 0; i < table.samples; ++i) {
                if (!table.outputs[k][i]) continue;
                pts.x.push_back(table.design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(strongest)));
                pts.y.push_back(*table.outputs[k][i]);
            }
            auto out = open_output(dir / ("scatter_" + index + ".svg"));
            svg::scatter_plot(out, pts,
                              {.title = index + " against " + table.parameters[strongest],
                               .x_label = table.parameters[strongest],
                               .y_label = index});
        }
    }
    json summary{{"model", std::string(to_string(model))},
                 {"samples", table.samples},
                 {"failed_runs", table.failed_runs},
                 {"inadmissible", table.inadmissible},
                 {"threshold_f2star", table.threshold_f2star},
                 {"insufficient_variance", json::array()}};
    for (std::size_t j = 0; j < table.parameters.size(); ++j)
        if (table.insufficient_variance[j]) summary["insufficient_variance"].push_back(table.parameters[j]);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct DelayScanArgs {
    std::string params;
    std::string taus;
    std::optional<double> seed_f1, seed_f2, f1star;
    double phase1_horizon = 26.0;
    double phase2_horizon = 26.0;
    double step = 0.01;
    std::string out = "-";
    std::string svg;
};

std::vector<double> parse_taus(const std::string& text) {
    std::vector<double> out;
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        // start:stop:step
        std::vector<double> parts;
        std::string_view rest(text);
        while (true) {
            const auto c = rest.find(':');
            parts.push_back(detail::parse_number(rest.substr(0, c), "--taus"));
            if (c == std::string_view::npos) break;
            rest.remove_prefix(c + 1);
        }
        if (parts.size() != 3 || !(parts[2] > 0.0) || !(parts[1] >= parts[0]))
            throw ValidationError("--taus range must be start:stop:step with step > 0");
        const auto n = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(parts[0] + static_cast<double>(i) * parts[2]);
        return out;
    }
    std::string_view rest(text);
    while (true) {
        const auto c = rest.find(',');
        out.push_back(detail::parse_number(rest.substr(0, c), "--taus"));
        if (c == std::string_view::npos) break;
        rest.remove_prefix(c + 1);
    }
    return out;
}

int run_delay_scan(const DelayScanArgs& a) {
    const ParameterFile pf = load_params(a.params);
    DelayScanOptions opt;
    opt.seed_f1 = a.seed_f1.value_or(pf.number("seed_f1").value_or(1.0));
    opt.phase1_horizon = a.phase1_horizon;
    opt.phase2_horizon = a.phase2_horizon;
    opt.step = a.step;
    opt.f1star = a.f1star;
    opt.early = early_of(pf);
    const auto taus = parse_taus(a.taus);
    const DelayScan scan =
        delay_scan(pf.phase1(), pf.phase2(), taus, a.seed_f2.value_or(pf.number("seed_f2").value_or(1.0)), opt);

    std::ostringstream csv;
    auto cell = [](const std::optional<double>& v) { return v ? detail::format_number(*v) : std::string(); };
    csv << "tau,phase,r0,f2max,t2max,c2_final,t2b,t2e,t2i,v2o,v2d\n";
    for (const auto& e : scan.entries) {
        const auto& r = e.report;
        csv << detail::format_number(e.tau) << ',' << to_string(e.phase) << ',' << cell(r.r0) << ','
            << detail::format_number(r.f2max) << ',' << detail::format_number(r.t2max) << ','
            << detail::format_number(r.c2_final) << ',' << cell(r.t2b) << ',' << cell(r.t2e) << ',' << cell(r.t2i)
            << ',' << cell(r.v2o) << ',' << cell(r.v2d) << '\n';
    }
    write_text(a.out, csv.str());
    if (!a.svg.empty()) {
        svg::Series outbreak{"C2 final, outbreak", {}, {}}, quasi{"C2 final, quasi-steady", {}, {}};
        for (const auto& e : scan.entries) {
            auto& s = e.phase == SpreadPhase::outbreak ? outbreak : quasi;
            s.x.push_back(e.tau);
            s.y.push_back(e.report.c2_final);
        }
        auto out = open_output(a.svg);
        svg::line_chart(out, {outbreak, quasi},
                        {.title = "final size by posting delay", .x_label = "tau (hours)", .y_label = "C2 final"});
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-piece information spread: simulation, fitting, indices and sensitivity"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "integrate a model and write its trajectory as CSV");
    s->add_option("--model", sim.model, "phase1, lti or sti")->check(CLI::IsMember({"phase1", "lti", "sti"}));
    s->add_option("--params", sim.params, "parameter JSON file")->required();
    s->add_option("--t-end", sim.t_end, "hours to simulate (after posting for lti/sti)");
    s->add_option("--step", sim.step, "integration step, hours");
    s->add_option("--record-every", sim.record_every, "keep every n-th step");
    s->add_option("--tau", sim.tau, "posting time of the second piece");
    s->add_option("--seed-f1", sim.seed_f1, "initial forwarders of the first piece");
    s->add_option("--seed-f2", sim.seed_f2, "initial forwarders of the second piece");
    s->add_option("--out", sim.out, "trajectory CSV (default stdout)");
    s->add_option("--svg", sim.svg, "optional plot");

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "least-squares calibration against observed series");
    f->add_option("--spec", fa.spec, "fit specification JSON")->required();
    f->add_option("--data", fa.data, "observed series CSV")->required();
    f->add_option("--secondary", fa.secondary, "second piece's series CSV (sti)");
    f->add_option("--seed", fa.seed, "restart seed");
    f->add_option("--restarts", fa.restarts, "number of restarts");
    f->add_option("--out", fa.out, "result JSON (default stdout)");
    f->add_option("--svg", fa.svg, "optional data/model plot");

    IndicesArgs ia;
    auto* x = app.add_subcommand("indices", "spread indices of a trajectory CSV");
    x->add_option("--trajectory", ia.trajectory, "trajectory CSV with t, f2, c2 columns")->required();
    x->add_option("--f2star", ia.f2star, "absolute outbreak threshold");
    x->add_option("--fraction", ia.fraction, "threshold as a fraction of the peak (default 0.05)");
    x->add_option("--out", ia.out, "report JSON (default stdout)");

    PrccArgs pa;
    auto* p = app.add_subcommand("prcc", "Latin hypercube sensitivity with partial rank correlations");
    p->add_option("--model", pa.model, "lti or sti")->check(CLI::IsMember({"lti", "sti"}));
    p->add_option("--params", pa.params, "baseline parameter JSON")->required();
    p->add_option("--samples", pa.samples, "LHS sample count");
    p->add_option("--factor", pa.factor, "relative half-width of each range");
    p->add_option("--seed", pa.seed, "LHS seed");
    p->add_option("--horizon", pa.horizon, "hours after posting");
    p->add_option("--tau", pa.tau, "posting time of the second piece");
    p->add_option("--step", pa.step, "integration step, hours");
    p->add_option("--out-dir", pa.out_dir, "output directory");

    DelayScanArgs da;
    auto* d = app.add_subcommand("delay-scan", "final size and indices across posting delays");
    d->add_option("--params", da.params, "parameter JSON file")->required();
    d->add_option("--taus", da.taus, "comma list or start:stop:step")->required();
    d->add_option("--seed-f1", da.seed_f1, "initial forwarders of the first piece");
    d->add_option("--seed-f2", da.seed_f2, "initial forwarders of the second piece");
    d->add_option("--f1star", da.f1star, "outbreak threshold on F1 (default 5% of its peak)");
    d->add_option("--phase1-horizon", da.phase1_horizon, "hours of first-piece run");
    d->add_option("--phase2-horizon", da.phase2_horizon, "hours simulated after each posting");
    d->add_option("--step", da.step, "integration step, hours");
    d->add_option("--out", da.out, "scan CSV (default stdout)");
    d->add_option("--svg", da.svg, "optional plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("validation", e.what());
        return 1;
    }

    try {
        if (*s) return run_simulate(sim);
        if (*f) return run_fit(fa);
        if (*x) return run_indices(ia);
        if (*p) return run_prcc(pa);
        if (*d) return run_delay_scan(da);
    } catch (const ValidationError& e) {
        report_error("validation", e.what());
        return 1;
    } catch (const NumericalError& e) {
        report_error("numerical", e.what());
        return 2;
    } catch (const json::exception& e) {
        report_error("validation", e.what());
        return 1;
    } catch (const fs::filesystem_error& e) {
        report_error("validation", e.what());
        return 1;
    }
    return 1;
}
