#include <set>

#include <doctest.h>

#include "flipscore/blocks.hpp"
#include "flipscore/error.hpp"

using namespace flipscore;

namespace {
FlipPlan make_plan(const ClusterLabels& labels, std::size_t flips, std::uint64_t seed)
{
    FlipPlan plan;
    plan.num_flips = flips;
    plan.seed = seed;
    plan.blocks = block_structure(labels);
    return plan;
}
}  // namespace

TEST_CASE("block structure follows first appearance")
{
    const auto b = block_structure({7, 3, 7, 9, 3});
    REQUIRE(b.num_blocks() == 3);
    CHECK(b.blocks[0] == std::vector<Eigen::Index>{0, 2});
    CHECK(b.blocks[1] == std::vector<Eigen::Index>{1, 4});
    CHECK(b.blocks[2] == std::vector<Eigen::Index>{3});
    CHECK(b.block_of == std::vector<std::size_t>{0, 1, 0, 2, 1});
    CHECK(b.sizes() == std::vector<std::size_t>{2, 2, 1});
}

TEST_CASE("expanding block signs")
{
    const auto b = block_structure({1, 1, 2, 2, 3});
    const Eigen::VectorXd s = expand_signs(b, {-1, -1, 1});
    CHECK(s == Eigen::VectorXd{{-1.0, -1.0, -1.0, -1.0, 1.0}});
}

TEST_CASE("equal-size clusters give a Kronecker sign pattern")
{
    ClusterLabels labels;
    for (int j = 0; j < 6; ++j) {
        for (int i = 0; i < 4; ++i) {
            labels.push_back(j);
        }
    }
    const auto plan = make_plan(labels, 50, 17);
    const Eigen::MatrixXd flips = generate_flips(plan);
    for (Eigen::Index w = 0; w < flips.cols(); ++w) {
        const auto bs = block_signs(plan, static_cast<std::size_t>(w));
        Eigen::VectorXd kron(24);
        for (int j = 0; j < 6; ++j) {
            kron.segment(4 * j, 4).setConstant(bs[static_cast<std::size_t>(j)]);
        }
        CHECK(flips.col(w) == kron);
    }
}

TEST_CASE("generated flips: identity first, block constant, reproducible")
{
    const ClusterLabels labels{4, 4, 1, 1, 1, 9, 2, 2, 9, 5};
    const auto plan = make_plan(labels, 300, 123);
    const Eigen::MatrixXd f = generate_flips(plan);
    CHECK(f.rows() == 10);
    CHECK(f.cols() == 300);
    CHECK((f.col(0).array() == 1.0).all());
    CHECK((f.array().abs() == 1.0).all());
    for (Eigen::Index w = 0; w < f.cols(); ++w) {
        for (const auto& block : plan.blocks.blocks) {
            for (Eigen::Index i : block) {
                CHECK(f(i, w) == f(block.front(), w));
            }
        }
    }
    CHECK(generate_flips(plan) == f);
    CHECK(generate_flips(make_plan(labels, 300, 124)) != f);
}

TEST_CASE("block_sign agrees with block_signs beyond one Philox word")
{
    ClusterLabels labels(300);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<std::int64_t>(i);
    }
    const auto plan = make_plan(labels, 5, 99);
    for (std::size_t w = 0; w < 5; ++w) {
        const auto bs = block_signs(plan, w);
        for (std::size_t j = 0; j < labels.size(); ++j) {
            CHECK(bs[j] == block_sign(99, w, j));
        }
    }
}

TEST_CASE("signs are balanced")
{
    ClusterLabels labels(64);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = static_cast<std::int64_t>(i);
    }
    const Eigen::MatrixXd f = generate_flips(make_plan(labels, 2001, 5));
    const double mean = f.rightCols(2000).mean();
    CHECK(std::abs(mean) < 0.01);
}

TEST_CASE("invalid plans")
{
    CHECK_THROWS_AS(generate_flips(make_plan({1, 2, 3}, 1, 0)), InvalidPlanError);
    CHECK_THROWS_AS(generate_flips(make_plan({}, 10, 0)), InvalidPlanError);
    CHECK_THROWS_AS(generate_flips(make_plan({1}, 0, 0)), InputError);
}
