#include <cmath>
#include <random>

#include <doctest.h>

#include "flipscore/error.hpp"
#include "flipscore/flip_test.hpp"
#include "flipscore/simulate.hpp"
#include "oracles.hpp"

using namespace flipscore;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

FlipPlan plan_for(const ModelData& d, std::size_t flips, std::uint64_t seed)
{
    FlipPlan plan;
    plan.num_flips = flips;
    plan.seed = seed;
    plan.blocks = block_structure(d.cluster);
    return plan;
}

ModelData gaussian_clustered(std::mt19937_64& rng, int clusters, int per, int p)
{
    std::normal_distribution<double> normal;
    const int n = clusters * per;
    ModelData d;
    d.y.resize(n);
    d.x = oracle::random_matrix(rng, n, p);
    d.z = oracle::random_nuisance(rng, n, 2);
    d.cluster.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < clusters; ++j) {
        const double u = normal(rng);
        for (int i = 0; i < per; ++i) {
            const int r = j * per + i;
            d.y[r] = 0.5 + 0.3 * d.z(r, 1) + u + normal(rng);
            d.cluster[static_cast<std::size_t>(r)] = j;
        }
    }
    return d;
}

}  // namespace

TEST_CASE("gaussian null: rejection rate inside the Monte Carlo band")
{
    std::mt19937_64 rng(1234);
    const int reps = 500;
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const auto d = gaussian_clustered(rng, 20, 4, 1);
        const auto res = flip_test(d, Family::gaussian(), plan_for(d, 200, rep), Alternative::TwoSided, 0);
        rejections += res.p_values[0] <= 0.05;
    }
    const auto [lo, hi] = oracle::mc_band(0.05, reps);
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(rate >= lo);
    CHECK(rate <= hi);
}

TEST_CASE("binomial strong signal is detected")
{
    Scenario sc;
    sc.clusters = 50;
    sc.per_cluster = 10;
    sc.beta = 2.0;
    sc.gamma = 1.0;
    sc.random_sd = 1.0;
    sc.random_slope = false;
    sc.seed = 77;
    const ModelData d = simulate_cluster_dataset(sc, 0);
    const auto res = flip_test(d, Family::binomial(), plan_for(d, 1000, 3), Alternative::TwoSided, 0);
    CHECK(res.p_values[0] <= 0.01);
    CHECK(res.z_value[0] > 0.0);
}

TEST_CASE("result layout and determinism")
{
    std::mt19937_64 rng(5);
    const auto d = gaussian_clustered(rng, 12, 3, 2);
    const auto plan = plan_for(d, 150, 9);
    const auto a = flip_test(d, Family::gaussian(), plan, Alternative::TwoSided, 1);
    const auto b = flip_test(d, Family::gaussian(), plan, Alternative::TwoSided, 1);
    CHECK(a.flipped == b.flipped);
    CHECK(a.p_values == b.p_values);
    CHECK(a.flipped.rows() == 150);
    CHECK(a.flipped(0, 0) == a.z_value[0]);
    CHECK(a.z_value[0] == doctest::Approx(a.score[0] / a.std_error[0]));
    CHECK(a.partial_cor[0] == doctest::Approx(a.z_value[0] / std::sqrt(36.0)));
    const double w = 150.0;
    CHECK(a.p_values[0] >= 1.0 / w);
    CHECK(a.p_values[0] <= 1.0);
    CHECK(std::abs(a.p_values[0] * w - std::round(a.p_values[0] * w)) < 1e-9);
}

TEST_CASE("scale equivariance of the standardized score")
{
    std::mt19937_64 rng(6);
    const auto d = gaussian_clustered(rng, 15, 3, 1);
    const auto plan = plan_for(d, 200, 1);
    const auto base_g = flip_test(d, Family::gaussian(), plan, Alternative::Greater, 0);
    const auto base_l = flip_test(d, Family::gaussian(), plan, Alternative::Less, 0);
    for (double c : {3.7, 0.01}) {
        ModelData s = d;
        s.x *= c;
        const auto r = flip_test(s, Family::gaussian(), plan, Alternative::Greater, 0);
        CHECK((r.flipped - base_g.flipped).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(r.p_values == base_g.p_values);
    }
    ModelData neg = d;
    neg.x *= -2.0;
    const auto r = flip_test(neg, Family::gaussian(), plan, Alternative::Greater, 0);
    CHECK((r.flipped + base_g.flipped).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.p_values[0] == base_l.p_values[0]);
}

TEST_CASE("multi-df test with one column equals the two-sided test")
{
    std::mt19937_64 rng(7);
    const auto d = gaussian_clustered(rng, 10, 5, 3);
    const auto plan = plan_for(d, 300, 2);
    const auto single = flip_test(d, Family::gaussian(), plan, Alternative::TwoSided, 2);
    const auto multi = multi_df_test(d, Family::gaussian(), plan, {2});
    REQUIRE(multi.combined_p.has_value());
    CHECK(*multi.combined_p == single.p_values[0]);
    CHECK(*multi.combined_statistic == doctest::Approx(single.z_value[0] * single.z_value[0]));
}

TEST_CASE("multi-df test reports per-column and combined results")
{
    std::mt19937_64 rng(8);
    const auto d = gaussian_clustered(rng, 10, 5, 3);
    const auto res = multi_df_test(d, Family::gaussian(), plan_for(d, 100, 2), {0, 2});
    CHECK(res.columns == std::vector<Eigen::Index>{0, 2});
    CHECK(res.p_values.size() == 2);
    CHECK(*res.combined_statistic == doctest::Approx(res.z_value.squaredNorm()));
}

TEST_CASE("error conditions")
{
    std::mt19937_64 rng(9);
    auto d = gaussian_clustered(rng, 6, 3, 2);
    SUBCASE("tested column inside the nuisance span")
    {
        d.x.col(0) = d.z.col(1) * 2.0;
        CHECK_THROWS_AS(flip_test(d, Family::gaussian(), plan_for(d, 20, 1), Alternative::TwoSided, 0),
                        DegenerateContrastError);
    }
    SUBCASE("all tested columns degenerate")
    {
        d.x.col(0) = d.z.col(0);
        d.x.col(1) = d.z.col(1);
        CHECK_THROWS_AS(multi_df_test(d, Family::gaussian(), plan_for(d, 20, 1), {0, 1}),
                        DegenerateContrastError);
    }
    SUBCASE("plan size mismatch")
    {
        auto plan = plan_for(d, 20, 1);
        plan.blocks = block_structure({1, 2, 3});
        CHECK_THROWS_AS(flip_test(d, Family::gaussian(), plan, Alternative::TwoSided, 0),
                        InvalidPlanError);
    }
    SUBCASE("column out of range")
    {
        CHECK_THROWS_AS(flip_test(d, Family::gaussian(), plan_for(d, 20, 1), Alternative::TwoSided, 5),
                        InputError);
    }
}

TEST_CASE("7-column categorical term under its null")
{
    std::mt19937_64 rng(4321);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> level(0, 7);
    const int reps = 300;
    const int clusters = 40;
    const int per = 5;
    int rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        ModelData d;
        const int n = clusters * per;
        d.y.resize(n);
        d.x = MatrixXd::Zero(n, 7);
        d.z = MatrixXd::Ones(n, 1);
        d.cluster.resize(static_cast<std::size_t>(n));
        for (int j = 0; j < clusters; ++j) {
            const int lev = level(rng);
            const double u = 0.5 * normal(rng);
            for (int i = 0; i < per; ++i) {
                const int r = j * per + i;
                if (lev > 0) {
                    d.x(r, lev - 1) = 1.0;
                }
                d.y[r] = normal(rng) + u > 0.0 ? 1.0 : 0.0;
                d.cluster[static_cast<std::size_t>(r)] = j;
            }
        }
        try {
            const auto res = multi_df_test(d, Family::binomial(), plan_for(d, 200, rep),
                                           {0, 1, 2, 3, 4, 5, 6});
            rejections += *res.combined_p <= 0.05;
        } catch (const NumericalError&) {
            // an empty level makes a column degenerate; counted as no rejection
        }
    }
    const auto [lo, hi] = oracle::mc_band(0.05, reps);
    const double rate = static_cast<double>(rejections) / reps;
    MESSAGE("categorical null rate " << rate);
    CHECK(rate >= lo);
    CHECK(rate <= hi);
}
