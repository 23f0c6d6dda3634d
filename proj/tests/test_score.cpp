#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "flipscore/error.hpp"
#include "flipscore/score.hpp"
#include "oracles.hpp"

using namespace flipscore;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Instance {
    ModelData data;
    NullFit fit;
};

Instance poisson_instance(std::mt19937_64& rng, Eigen::Index n, Eigen::Index q)
{
    Instance ins;
    ins.data.z = oracle::random_nuisance(rng, n, q);
    ins.data.x = oracle::random_matrix(rng, n, 1);
    std::poisson_distribution<int> pois(2.0);
    ins.data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ins.data.y[i] = pois(rng);
    }
    ins.data.cluster.resize(static_cast<std::size_t>(n));
    ins.fit = fit_null(ins.data, Family::poisson());
    return ins;
}

}  // namespace

TEST_CASE("effective score and flip variance match dense formulas on n = 8")
{
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 25; ++rep) {
        const auto ins = poisson_instance(rng, 8, 2);
        REQUIRE(ins.fit.converged);
        const auto decomp = score_decomposition(ins.fit, ins.data.x);
        const VectorXd x = ins.data.x.col(0);
        for (int f = 0; f < 5; ++f) {
            const VectorXd s = f == 0 ? VectorXd::Ones(8) : oracle::random_signs(rng, 8);
            const double expect_s = oracle::effective_score(x, ins.data.z, ins.fit.w_diag,
                                                            ins.fit.v_diag, decomp.r, s);
            CHECK(flipped_score(decomp, s, 0) == doctest::Approx(expect_s).epsilon(1e-10));
            const double expect_v = oracle::flip_variance(x, ins.data.z, ins.fit.w_diag, s);
            CHECK(flip_variance(decomp, s, 0) == doctest::Approx(expect_v).epsilon(1e-10));
            CHECK(flip_variance(ins.data.x, ins.fit, s, 0) ==
                  doctest::Approx(expect_v).epsilon(1e-10));
        }
        CHECK(decomp.observed_score(0) == doctest::Approx(flipped_score(decomp, VectorXd::Ones(8), 0)));
    }
}

TEST_CASE("identity-flip score vanishes for a column already in the null fit")
{
    std::mt19937_64 rng(2);
    auto ins = poisson_instance(rng, 20, 3);
    // Replacing x by a nuisance column makes (I - H) W^{1/2} x zero.
    ins.data.x.col(0) = ins.data.z.col(1);
    CHECK_THROWS_AS(score_decomposition(ins.fit, ins.data.x), DegenerateContrastError);
}

TEST_CASE("unconverged null fits are rejected")
{
    std::mt19937_64 rng(3);
    auto ins = poisson_instance(rng, 20, 2);
    ins.fit.converged = false;
    CHECK_THROWS_AS(score_decomposition(ins.fit, ins.data.x), NonConvergenceError);
}

TEST_CASE("flip variance of a degenerate flip raises")
{
    // x is constant on each flipped half, so F u lands in span(Z).
    ModelData d;
    d.y = VectorXd{{1.0, 2.0, 0.0, 3.0}};
    d.z = MatrixXd::Ones(4, 1);
    d.x = MatrixXd(4, 1);
    d.x << 1, 1, -1, -1;
    d.cluster = {0, 0, 1, 1};
    const auto fit = fit_null(d, Family::gaussian());
    const auto decomp = score_decomposition(fit, d.x);
    const VectorXd flip{{1.0, 1.0, -1.0, -1.0}};
    CHECK_THROWS_AS(flip_variance(decomp, flip, 0), DegenerateVarianceError);
    CHECK(flip_variance(decomp, VectorXd::Ones(4), 0) > 0.0);
}

TEST_CASE("standardized score")
{
    CHECK(standardized_score(3.0, 4.0) == 1.5);
    CHECK_THROWS_AS(standardized_score(1.0, 0.0), DegenerateVarianceError);
}

TEST_CASE("p-value counting includes the identity")
{
    SUBCASE("observed strictly largest of 200")
    {
        std::vector<double> s(200);
        s[0] = 10.0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            s[i] = static_cast<double>(i % 7) - 3.0;
        }
        const auto p = compute_pvalue(s[0], s, Alternative::TwoSided);
        CHECK(p.count == 1);
        CHECK(p.value() == doctest::Approx(1.0 / 200));
    }
    SUBCASE("all statistics identical")
    {
        const std::vector<double> s(50, 0.7);
        for (auto alt : {Alternative::TwoSided, Alternative::Greater, Alternative::Less}) {
            CHECK(compute_pvalue(s[0], s, alt).value() == 1.0);
        }
    }
    SUBCASE("50 of 1000 at least as extreme")
    {
        std::vector<double> s(1000, 0.0);
        s[0] = 2.0;
        for (std::size_t i = 1; i < 50; ++i) {
            s[i] = (i % 2 == 0) ? 2.5 : -2.0;
        }
        CHECK(compute_pvalue(s[0], s, Alternative::TwoSided).value() == doctest::Approx(0.05));
        // Greater counts only the positive ones plus the identity.
        CHECK(compute_pvalue(s[0], s, Alternative::Greater).count == 25);
        CHECK(compute_pvalue(s[0], s, Alternative::Less).count == 976);
    }
}

TEST_CASE("alternative names")
{
    CHECK(alternative_from_name("two-sided") == Alternative::TwoSided);
    CHECK(alternative_from_name("greater") == Alternative::Greater);
    CHECK(alternative_from_name("less") == Alternative::Less);
    CHECK(to_string(Alternative::Less) == "less");
    CHECK_THROWS_AS(alternative_from_name("both"), InputError);
}

TEST_CASE("block evaluator matches the direct computation")
{
    std::mt19937_64 rng(31);
    const Eigen::Index n = 30;
    auto ins = poisson_instance(rng, n, 3);
    ClusterLabels labels(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<std::int64_t>(i % 7);
    }
    FlipPlan plan;
    plan.num_flips = 40;
    plan.seed = 4;
    plan.blocks = block_structure(labels);
    const auto decomp = score_decomposition(ins.fit, ins.data.x);
    const BlockFlipEvaluator eval(decomp, plan.blocks);
    for (std::size_t w = 0; w < plan.num_flips; ++w) {
        const auto bs = block_signs(plan, w);
        const VectorXd s = expand_signs(plan.blocks, bs);
        const auto v = eval.evaluate(bs, 0);
        CHECK(v.score == doctest::Approx(flipped_score(decomp, s, 0)).epsilon(1e-12));
        CHECK(v.variance == doctest::Approx(flip_variance(decomp, s, 0)).epsilon(1e-10));
    }
}
