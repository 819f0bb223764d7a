#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kdetl/stats.hpp"
#include "oracles.hpp"

using namespace kdetl;
using namespace kdetl::testing;

namespace {

Eigen::MatrixXd fixture() {
    // 12 blocks x 4 algorithms; algorithm 0 clearly best, 3 clearly worst,
    // with ties sprinkled in.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    Eigen::MatrixXd v(12, 4);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        v(i, 0) = 3.0 + n(rng);
        v(i, 1) = 1.5 + n(rng);
        v(i, 2) = 1.2 + n(rng);
        v(i, 3) = -1.0 + n(rng);
    }
    v(3, 1) = v(3, 2);
    v(7, 0) = v(7, 1) = v(7, 2);
    return v;
}

}  // namespace

TEST(Ranks, MidranksAndDirection) {
    Eigen::MatrixXd v(1, 4);
    v << 3, 1, 3, 0;
    const auto hi = rank_blocks(v, Direction::higher_better);
    EXPECT_DOUBLE_EQ(hi(0, 0), 1.5);
    EXPECT_DOUBLE_EQ(hi(0, 1), 3.0);
    EXPECT_DOUBLE_EQ(hi(0, 3), 4.0);
    const auto lo = rank_blocks(v, Direction::lower_better);
    EXPECT_DOUBLE_EQ(lo(0, 3), 1.0);
    EXPECT_DOUBLE_EQ(lo(0, 0), 3.5);
}

TEST(Friedman, MatchesClassicFormula) {
    const auto v = fixture();
    for (auto dir : {Direction::higher_better, Direction::lower_better}) {
        const bool hb = dir == Direction::higher_better;
        const auto res = friedman(v, dir);
        const double oracle = friedman_oracle(v, hb);
        EXPECT_NEAR(res.statistic, oracle, 1e-10);
        EXPECT_NEAR(res.p_value, chi2_sf_df3(oracle), 1e-10);
        EXPECT_LT((res.mean_ranks.transpose() - count_ranks(v, hb).colwise().mean()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Friedman, IdenticalColumnsGiveOne) {
    Eigen::MatrixXd v(5, 4);
    for (Eigen::Index i = 0; i < 5; ++i) v.row(i).setConstant(static_cast<double>(i));
    const auto res = friedman(v, Direction::higher_better);
    EXPECT_EQ(res.statistic, 0.0);
    EXPECT_EQ(res.p_value, 1.0);
    const auto pairs = bergmann_hommel(res.mean_ranks, 5, 0.05);
    EXPECT_TRUE(pairs.rejected.empty());
    EXPECT_EQ(pairs.adjusted_p.minCoeff(), 1.0);
    const auto groups = cd_groups(res.mean_ranks, pairs);
    ASSERT_EQ(groups.size(), 1u);
    EXPECT_EQ(groups[0].size(), 4u);
}

TEST(ExhaustiveSets, BellNumbersMinusOne) {
    EXPECT_EQ(exhaustive_sets(2).size(), 1u);
    EXPECT_EQ(exhaustive_sets(3).size(), 4u);
    EXPECT_EQ(exhaustive_sets(4).size(), 14u);
    EXPECT_EQ(exhaustive_sets(5).size(), 51u);
}

TEST(BergmannHommel, MatchesSubsetEnumeration) {
    const auto v = fixture();
    const auto res = friedman(v, Direction::higher_better);
    const auto pairs = bergmann_hommel(res.mean_ranks, 12, 0.05);
    const auto raw = pairwise_pvalues(res.mean_ranks, 12);
    std::vector<double> p;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) p.push_back(raw(i, j));
    const auto oracle = bh_oracle(p, 4);
    std::size_t expected_rejections = 0;
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const double o = oracle[pair_index(i, j, 4)];
            EXPECT_NEAR(pairs.adjusted_p(i, j), o, 1e-12);
            EXPECT_EQ(pairs.is_rejected(i, j), o <= 0.05);
            expected_rejections += o <= 0.05;
        }
    }
    EXPECT_EQ(pairs.rejected.size(), expected_rejections);
    EXPECT_GT(expected_rejections, 0u);
}

TEST(BergmannHommel, RandomRankVectorsMatchOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd ranks(5);
        for (int i = 0; i < 5; ++i) ranks(i) = u(rng);
        const auto pairs = bergmann_hommel(ranks, 20, 0.05);
        const auto raw = pairwise_pvalues(ranks, 20);
        std::vector<double> p;
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) p.push_back(raw(i, j));
        const auto oracle = bh_oracle(p, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = i + 1; j < 5; ++j) ASSERT_NEAR(pairs.adjusted_p(i, j), oracle[pair_index(i, j, 5)], 1e-12);
    }
}

TEST(Pairwise, ZStatistic) {
    Eigen::VectorXd ranks(3);
    ranks << 1.0, 2.0, 3.0;
    const auto p = pairwise_pvalues(ranks, 6);
    const double se = std::sqrt(3.0 * 4.0 / 36.0);
    EXPECT_NEAR(p(0, 2), std::erfc(2.0 / se / std::sqrt(2.0)), 1e-14);
    EXPECT_EQ(p(1, 1), 1.0);
}

TEST(CdGroups, MaximalCliquesOfNonRejected) {
    Eigen::VectorXd ranks(4);
    ranks << 1.0, 1.2, 3.8, 4.0;
    PairwiseResult pr;
    pr.raw_p = pr.adjusted_p = Eigen::MatrixXd::Ones(4, 4);
    pr.rejected = {{0, 2}, {0, 3}, {1, 2}, {1, 3}};
    const auto groups = cd_groups(ranks, pr);
    ASSERT_EQ(groups.size(), 2u);
    EXPECT_EQ(groups[0], (std::vector<int>{0, 1}));
    EXPECT_EQ(groups[1], (std::vector<int>{2, 3}));
}
