#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dtsfi/fixtures.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/sensitivity.hpp"

using namespace dtsfi;
namespace pub = dtsfi::fixtures::published;

namespace {

SamplingPlan unit_plan(std::size_t params, std::size_t samples, std::uint64_t seed) {
    SamplingPlan plan;
    plan.samples = samples;
    plan.seed = seed;
    for (std::size_t i = 0; i < params; ++i) plan.ranges.push_back({"x" + std::to_string(i), 0.0, 1.0});
    return plan;
}

std::vector<std::optional<double>> outputs_of(const Eigen::MatrixXd& x, auto&& f) {
    std::vector<std::optional<double>> y;
    for (Eigen::Index i = 0; i < x.rows(); ++i) y.emplace_back(f(x.row(i)));
    return y;
}

// Partial correlations from the inverse correlation matrix of the ranks.
std::vector<double> precision_oracle(const Eigen::MatrixXd& x, const std::vector<std::optional<double>>& y) {
    const Eigen::Index n = x.rows(), k = x.cols();
    Eigen::MatrixXd r(n, k + 1);
    std::vector<double> col(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c <= k; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = c < k ? x(i, c) : *y[static_cast<std::size_t>(i)];
        const auto rk = average_ranks(col);
        for (Eigen::Index i = 0; i < n; ++i) r(i, c) = rk[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd centered = r.rowwise() - r.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::MatrixXd p = cov.inverse();
    std::vector<double> out;
    for (Eigen::Index c = 0; c < k; ++c) out.push_back(-p(c, k) / std::sqrt(p(c, c) * p(k, k)));
    return out;
}

} // namespace

TEST(Lhs, OnePointPerQuartile) {
    SamplingPlan plan = unit_plan(1, 4, 3);
    plan.validate(1);
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd x = lhs_unit(4, 1, rng);
    std::array<int, 4> hits{};
    for (Eigen::Index i = 0; i < 4; ++i) ++hits[static_cast<std::size_t>(std::floor(x(i, 0) * 4))];
    EXPECT_EQ(hits, (std::array<int, 4>{1, 1, 1, 1}));
}

TEST(Lhs, EachDecileHoldsExactlyOneHundred) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(9, 1000, 7));
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        std::array<int, 10> hits{};
        for (Eigen::Index i = 0; i < x.rows(); ++i) ++hits[static_cast<std::size_t>(std::floor(x(i, c) * 10))];
        for (int h : hits) EXPECT_EQ(h, 100);
    }
}

TEST(Lhs, SeedsPermuteButKeepStratification) {
    const Eigen::MatrixXd a = lhs_sample(unit_plan(3, 200, 1));
    const Eigen::MatrixXd b = lhs_sample(unit_plan(3, 200, 2));
    EXPECT_TRUE(a.isApprox(lhs_sample(unit_plan(3, 200, 1)), 0.0));
    EXPECT_FALSE(a.isApprox(b));
    for (Eigen::Index c = 0; c < 3; ++c) {
        std::vector<int> sa, sb;
        for (Eigen::Index i = 0; i < 200; ++i) {
            sa.push_back(static_cast<int>(a(i, c) * 200));
            sb.push_back(static_cast<int>(b(i, c) * 200));
        }
        EXPECT_NE(sa, sb);
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        EXPECT_EQ(sa, sb);
    }
}

TEST(Lhs, ScalesToRanges) {
    SamplingPlan plan = unit_plan(2, 100, 5);
    plan.ranges[1] = {"y", -3.0, 5.0};
    const Eigen::MatrixXd x = lhs_sample(plan);
    EXPECT_GE(x.col(1).minCoeff(), -3.0);
    EXPECT_LT(x.col(1).maxCoeff(), 5.0);
    EXPECT_LT(x.col(1).minCoeff(), -3.0 + 0.08);
}

TEST(Lhs, RejectsInvalidPlans) {
    EXPECT_THROW(lhs_sample(unit_plan(2, 99, 1)), ValidationError);
    SamplingPlan plan = unit_plan(2, 100, 1);
    plan.ranges[0].upper = 0.0;
    EXPECT_THROW(lhs_sample(plan), ValidationError);
    EXPECT_THROW(lhs_sample(unit_plan(0, 100, 1)), ValidationError);
}

TEST(AverageRanks, SharesTiedRanks) {
    const std::vector<double> v{3.0, 1.0, 3.0, 2.0, 3.0};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{4.0, 1.0, 4.0, 2.0, 4.0}));
}

TEST(Prcc, PerfectDependence) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(9, 1000, 11));
    const auto y = outputs_of(x, [](const auto& row) { return row(4); });
    const PrccColumn p = prcc(x, y);
    EXPECT_GE(*p.values[4], 0.99);
    EXPECT_EQ(p.used, 1000u);
}

TEST(Prcc, IndependentOutputIsNearZero) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(9, 1000, 12));
    std::mt19937_64 rng(99);
    std::normal_distribution<double> noise;
    const auto y = outputs_of(x, [&](const auto&) { return noise(rng); });
    for (const auto& v : prcc(x, y).values) EXPECT_LT(std::abs(*v), 0.1);
}

TEST(Prcc, DifferenceIsAntisymmetric) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(4, 1000, 13));
    const auto y = outputs_of(x, [](const auto& row) { return row(0) - row(1); });
    const PrccColumn p = prcc(x, y);
    EXPECT_GT(*p.values[0], 0.5);
    EXPECT_NEAR(*p.values[0], -*p.values[1], 0.02);
    EXPECT_LT(std::abs(*p.values[2]), 0.1);
}

TEST(Prcc, MatchesPrecisionMatrixOracle) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(5, 300, 14));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.3);
    const auto y = outputs_of(x, [&](const auto& row) { return std::exp(row(0)) - 2.0 * row(2) * row(2) + row(3) + noise(rng); });
    const PrccColumn p = prcc(x, y);
    const auto oracle = precision_oracle(x, y);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(*p.values[j], oracle[j], 1e-9) << "column " << j;
}

TEST(Prcc, InvariantUnderMonotoneTransformOfAColumn) {
    Eigen::MatrixXd x = lhs_sample(unit_plan(4, 400, 15));
    const auto y = outputs_of(x, [](const auto& row) { return row(0) + 0.5 * row(1) * row(3); });
    const PrccColumn before = prcc(x, y);
    x.col(1) = x.col(1).array().exp().matrix() * 3.0;
    x.col(3) = x.col(3).array().cube().matrix();
    const PrccColumn after = prcc(x, y);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(*before.values[j], *after.values[j], 1e-12);
}

TEST(Prcc, BoundedOnArbitraryInputs) {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd x(50, 6);
        for (Eigen::Index i = 0; i < 50; ++i)
            for (Eigen::Index j = 0; j < 6; ++j) x(i, j) = trial % 2 ? std::round(u(rng) / 300) : u(rng);
        std::vector<std::optional<double>> y;
        for (int i = 0; i < 50; ++i) y.emplace_back(i % 7 == 0 ? std::optional<double>{} : std::optional<double>{u(rng)});
        const PrccColumn p = prcc(x, y);
        EXPECT_EQ(p.used, 42u);
        for (const auto& v : p.values)
            if (v) {
                EXPECT_GE(*v, -1.0);
                EXPECT_LE(*v, 1.0);
            }
    }
}

TEST(Prcc, ExcludesUndefinedOutputsAndNeedsEnoughRows) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(3, 100, 17));
    auto y = outputs_of(x, [](const auto& row) { return row(0); });
    for (std::size_t i = 0; i < 96; ++i) y[i].reset();
    EXPECT_THROW(prcc(x, y), InsufficientDataError);
    y[0] = 1.0;
    EXPECT_EQ(prcc(x, y).used, 5u);
    EXPECT_THROW(prcc(x, std::vector<std::optional<double>>(3)), ValidationError);
}

TEST(Prcc, ConstantOutputIsUndefined) {
    const Eigen::MatrixXd x = lhs_sample(unit_plan(3, 100, 18));
    const std::vector<std::optional<double>> y(100, 2.0);
    for (const auto& v : prcc(x, y).values) EXPECT_FALSE(v);
}

namespace {

SensitivityBaseline lti_baseline() {
    return posting_baseline(ModelKind::lti, pub::information_b_phase1, pub::information_c_lti, fixtures::gap_b_to_c, 15.0,
                            20.0);
}

} // namespace

TEST(RunSensitivity, CollapsedRangesReportInsufficientVariance) {
    const auto b = lti_baseline();
    SamplingPlan plan = relative_plan(ModelKind::lti, b.phase2, b.s0, 0.5, 100, 3);
    for (auto& r : plan.ranges) {
        const double mid = 0.5 * (r.lower + r.upper);
        r.lower = mid;
        r.upper = mid * (1.0 + 1e-12);
    }
    const PrccTable t = run_sensitivity(b.scenario, b.phase2, b.s0, plan);
    for (std::size_t j = 0; j < sensitivity_param_count; ++j) {
        EXPECT_TRUE(t.insufficient_variance[j]);
        for (IndexId id : all_indices) EXPECT_FALSE(t.at(j, id));
    }
}

TEST(RunSensitivity, LongIntervalReproductionRatioSigns) {
    const auto b = lti_baseline();
    const PrccTable t = run_sensitivity(b.scenario, b.phase2, b.s0, relative_plan(ModelKind::lti, b.phase2, b.s0, 0.5, 1000, 1));
    ASSERT_EQ(t.parameters.size(), 9u);
    EXPECT_EQ(t.parameters.back(), "s20");
    EXPECT_LE(t.failed_runs * 5, t.samples - t.inadmissible);
    for (std::size_t j = 0; j < 9; ++j) {
        const auto v = t.at(j, IndexId::r0);
        ASSERT_TRUE(v) << t.parameters[j];
        if (t.parameters[j] == "alpha2") EXPECT_LT(*v, 0.0);
        else EXPECT_GT(*v, 0.0) << t.parameters[j];
    }
    for (std::size_t k = 0; k < all_indices.size(); ++k) EXPECT_LE(t.used[k], t.samples);
    for (const auto& row : t.values)
        for (const auto& v : row)
            if (v) EXPECT_LE(std::abs(*v), 1.0);
}

TEST(RunSensitivity, IsDeterministicInSeed) {
    const auto b = lti_baseline();
    const auto plan = relative_plan(ModelKind::lti, b.phase2, b.s0, 0.5, 120, 9);
    const PrccTable x = run_sensitivity(b.scenario, b.phase2, b.s0, plan);
    const PrccTable y = run_sensitivity(b.scenario, b.phase2, b.s0, plan);
    EXPECT_EQ(x.values, y.values);
    EXPECT_TRUE(x.design.isApprox(y.design, 0.0));
}

TEST(RunSensitivity, ShortIntervalUsesSharedPoolAtPosting) {
    const auto b = posting_baseline(ModelKind::sti, pub::information_a_late, pub::information_b_sti, 2.0, 47.0, 15.0,
                                    pub::information_a_early);
    EXPECT_EQ(b.s0, pub::information_a_late.s10);
    EXPECT_EQ(b.scenario.phase1, pub::information_a_late);
    const Phase1State at = run_phase1(pub::information_a_early, 47.0, 2.0).states.back();
    EXPECT_EQ(b.scenario.at_posting.f1, at.f1);
    const auto plan = relative_plan(ModelKind::sti, b.phase2, b.s0);
    EXPECT_EQ(plan.ranges.back().name, "s10");
    EXPECT_LE(plan.ranges[static_cast<std::size_t>(SensitivityParam::p2)].upper, 1.0);
}

TEST(RunSensitivity, RejectsWrongPlanShape) {
    const auto b = lti_baseline();
    EXPECT_THROW(run_sensitivity(b.scenario, b.phase2, b.s0, unit_plan(3, 100, 1)), ValidationError);
    EXPECT_THROW(make_scenario(ModelKind::phase1, pub::information_b_phase1, run_phase1(pub::information_b_phase1, 1, 1), 0.5, 1),
                 ValidationError);
}
