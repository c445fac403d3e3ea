#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dtsfi/fixtures.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/json_io.hpp"

using namespace dtsfi;
namespace pub = dtsfi::fixtures::published;
namespace cal = dtsfi::fixtures::calibrated;

TEST(JsonIo, ParametersRoundTrip) {
    EXPECT_EQ(phase1_from_json(to_json(pub::information_a_early)), pub::information_a_early);
    EXPECT_EQ(phase2_from_json(to_json(pub::information_c_lti)), pub::information_c_lti);
    ParamBundle b{pub::information_a_late, pub::information_b_sti};
    const json j = to_json(b);
    EXPECT_EQ(phase1_from_json(j), b.phase1);
    EXPECT_EQ(phase2_from_json(j), b.phase2);
}

TEST(JsonIo, MissingOrMistypedParameterIsValidationError) {
    json j = to_json(pub::information_a_early);
    j.erase("alpha1");
    EXPECT_THROW(phase1_from_json(j), ValidationError);
    j = to_json(pub::information_a_early);
    j["beta1"] = "fast";
    EXPECT_THROW(phase1_from_json(j), ValidationError);
    json k = to_json(pub::information_c_lti);
    k.erase("s20");
    EXPECT_EQ(phase2_from_json(k).s20, 0.0);
}

TEST(JsonIo, OutOfDomainParametersAreRejectedOnLoad) {
    json j = to_json(pub::information_a_early);
    j["beta1"] = -1.0;
    EXPECT_THROW(phase1_from_json(j), ValidationError);
    json k = to_json(pub::information_c_lti);
    k["m23"] = 2.0 / k["p2"].get<double>();
    EXPECT_THROW(phase2_from_json(k), ValidationError);
    Phase1Params p = pub::information_a_early;
    p.alpha1 = 0.0;
    EXPECT_THROW(run_phase1(p, 47.0, 1.0), ValidationError);
}

TEST(JsonIo, ParameterFileExposesExtraKeys) {
    std::istringstream in(R"({"beta1": 1e-4, "p1": 0.5, "alpha1": 2, "s10": 1e5, "seed_f1": 47})");
    const ParameterFile f = parse_parameter_file(in);
    EXPECT_TRUE(f.has_phase1());
    EXPECT_FALSE(f.has_phase2());
    EXPECT_EQ(f.phase1().s10, 1e5);
    EXPECT_EQ(f.number("seed_f1"), 47.0);
    EXPECT_FALSE(f.number("tau"));
    std::istringstream bad("{not json");
    EXPECT_THROW(parse_parameter_file(bad), ValidationError);
    std::istringstream arr("[1, 2]");
    EXPECT_THROW(parse_parameter_file(arr), ValidationError);
}

TEST(JsonIo, IndexReportWritesNullsForUndefinedIndices) {
    IndexReport r;
    r.f2max = 4.0;
    r.c2_final = 12.0;
    r.threshold_f2star = 5.0;
    const json j = to_json(r);
    EXPECT_TRUE(j.at("t2b").is_null());
    EXPECT_TRUE(j.at("v2d").is_null());
    EXPECT_TRUE(j.at("r0").is_null());
    const IndexReport back = index_report_from_json(json::parse(j.dump()));
    EXPECT_FALSE(back.t2b);
    EXPECT_EQ(back.f2max, 4.0);
    EXPECT_EQ(back.threshold_f2star, 5.0);
}

TEST(JsonIo, IndexReportRoundTripsExactly) {
    const LtiSystem sys{pub::information_c_lti};
    IntegrationConfig cfg;
    cfg.t_end = 26.0;
    const IndexReport r = analyze(sys, integrate(sys, LtiPhase2State{7.4439e6, 993.0, 601129.0, 20.0, 0.0, 20.0}, cfg));
    const IndexReport b = index_report_from_json(json::parse(to_json(r).dump()));
    EXPECT_EQ(b.r0, r.r0);
    EXPECT_EQ(b.f2max, r.f2max);
    EXPECT_EQ(b.t2max, r.t2max);
    EXPECT_EQ(b.c2_final, r.c2_final);
    EXPECT_EQ(b.t2b, r.t2b);
    EXPECT_EQ(b.t2e, r.t2e);
    EXPECT_EQ(b.t2i, r.t2i);
    EXPECT_EQ(b.v2o, r.v2o);
    EXPECT_EQ(b.v2d, r.v2d);
    EXPECT_EQ(b.final_size_converged, r.final_size_converged);
}

TEST(JsonIo, FitResultEncodesNonFiniteErrorsAsNull) {
    FitResult r;
    r.restart_errors = {std::numeric_limits<double>::infinity(), 3.0};
    const json j = to_json(r, ModelKind::lti);
    EXPECT_TRUE(j.at("error").is_null());
    EXPECT_TRUE(j.at("restart_errors")[0].is_null());
    EXPECT_EQ(j.at("restart_errors")[1], 3.0);
    EXPECT_EQ(j.at("model"), "lti");
    EXPECT_TRUE(j.at("best").contains("m23"));
    EXPECT_FALSE(j.at("best").contains("beta1"));
}

TEST(JsonIo, FitSpecDefaultsAndOverrides) {
    const auto c = fixtures::information_c();
    const json j = json::parse(R"({
        "model": "lti", "phase1_seed": 15, "tau": 7.5, "restarts": 4, "seed": 9, "probe_evaluations": 200,
        "base": {"beta1": 1e-4, "p1": 0.5, "alpha1": 2, "s10": 1e5},
        "free": ["alpha2", {"name": "m23", "lower": 0.01, "upper": 2}]
    })");
    const FitSpec s = fit_spec_from_json(j, c);
    EXPECT_EQ(s.model, ModelKind::lti);
    EXPECT_EQ(s.restarts, 4u);
    EXPECT_EQ(s.seed, 9u);
    EXPECT_EQ(s.tau, 7.5);
    EXPECT_EQ(s.base.phase1.s10, 1e5);
    EXPECT_EQ(s.probe_evaluations, 200u);
    EXPECT_EQ(s.polish_evaluations, 100u);
    ASSERT_EQ(s.free.size(), 2u);
    EXPECT_EQ(s.free[0].id, ParamId::alpha2);
    EXPECT_EQ(s.free[1].lower, 0.01);
    EXPECT_EQ(s.free[1].upper, 2.0);
    const FitSpec d = fit_spec_from_json(json::parse(R"({"model": "sti"})"), c);
    EXPECT_EQ(d.free.size(), theta_sti().size());
    EXPECT_EQ(d.restarts, 32u);
    EXPECT_EQ(d.probe_evaluations, 0u);
    EXPECT_TRUE(d.polish);
    EXPECT_THROW(fit_spec_from_json(json::parse(R"({"free": []})"), c), ValidationError);
    EXPECT_THROW(fit_spec_from_json(json::parse(R"({"model": "sir"})"), c), ValidationError);
    EXPECT_THROW(fit_spec_from_json(json::parse(R"({"model": "lti", "free": ["kappa"]})"), c), ValidationError);
}

TEST(JsonIo, TrajectoryCsvRoundTripsForwardingColumns) {
    const LtiSystem sys{pub::information_c_lti};
    IntegrationConfig cfg;
    cfg.t_end = 3.0;
    const auto traj = integrate(sys, LtiPhase2State{7.4439e6, 993.0, 601129.0, 20.0, 0.0, 20.0}, cfg);
    std::stringstream csv;
    write_trajectory(csv, traj);
    const std::string header = csv.str().substr(0, csv.str().find('\n'));
    EXPECT_EQ(header, "t,s2,i1_plus,i1_minus,f2,i2,c2");
    const ForwardingSeries s = read_forwarding_series(csv);
    ASSERT_EQ(s.times.size(), traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_EQ(s.times[i], traj.times[i]);
        EXPECT_EQ(s.f2[i], traj.states[i].f2);
        EXPECT_EQ(s.c2[i], traj.states[i].c2);
    }
}

TEST(JsonIo, TrajectoryCsvErrors) {
    std::istringstream empty("");
    EXPECT_THROW(read_forwarding_series(empty), ValidationError);
    std::istringstream no_t("f2,c2\n1,2\n");
    EXPECT_THROW(read_forwarding_series(no_t), ValidationError);
    std::istringstream ragged("t,f2,c2\n0,1,2\n1,2\n");
    EXPECT_THROW(read_forwarding_series(ragged), ValidationError);
    std::istringstream backwards("t,f2,c2\n1,1,2\n0,2,3\n");
    EXPECT_THROW(read_forwarding_series(backwards), ValidationError);
    std::istringstream phase1_only("t,s1,f1,i1_plus,i1_minus,c1\n0,5,1,0,0,1\n1,4,1,1,0,2\n");
    const ForwardingSeries s = read_forwarding_series(phase1_only);
    EXPECT_EQ(s.f2, (std::vector<double>{0.0, 0.0}));
}

namespace {

ParameterFile data_file(const std::string& name) {
    std::ifstream in(std::string(DTSFI_DATA_DIR) + "/" + name);
    if (!in) throw std::runtime_error("cannot open " + name);
    return parse_parameter_file(in);
}

} // namespace

TEST(JsonIo, CalibrationFilesMatchFixtures) {
    EXPECT_EQ(data_file("tableA.json").phase1(), cal::information_a);
    EXPECT_EQ(data_file("tableB.json").phase1(), cal::information_b);
    const ParameterFile c = data_file("tableC.json");
    EXPECT_EQ(c.phase1(), cal::information_b);
    EXPECT_EQ(c.phase2(), cal::information_c_lti);
    EXPECT_EQ(c.number("tau"), fixtures::gap_b_to_c);
    const ParameterFile ab = data_file("tableAB.json");
    EXPECT_EQ(ab.phase1(), cal::information_ab_late);
    EXPECT_EQ(ab.phase2(), cal::information_ab_sti);
    EXPECT_EQ(phase1_from_json(ab.raw.at("early")), cal::information_ab_early);
}
