#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kdetl/dataset.hpp"
#include "kdetl/rcot.hpp"

using namespace kdetl;

namespace {

Eigen::VectorXd normals(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
    return v;
}

}  // namespace

TEST(WeightedChisq, SingleWeightIsScaledChiSquareOne) {
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 2.0);
    for (double s : {0.5, 2.0, 7.68, 15.0}) {
        const double exact = std::erfc(std::sqrt(s / 2.0 / 2.0));
        EXPECT_NEAR(weighted_chisq_sf(w, s, NullApprox::hbe), exact, 1e-12);
        EXPECT_NEAR(weighted_chisq_sf(w, s, NullApprox::gamma2), exact, 1e-12);
    }
}

TEST(WeightedChisq, EqualPairIsExponential) {
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(2);
    for (double s : {0.1, 1.0, 5.991464547107979}) {
        EXPECT_NEAR(weighted_chisq_sf(w, s, NullApprox::hbe), std::exp(-s / 2.0), 1e-12);
    }
}

TEST(WeightedChisq, HbeTracksMonteCarlo) {
    Eigen::VectorXd w(4);
    w << 3.0, 1.0, 0.5, 0.1;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n;
    const int draws = 200000;
    std::vector<double> sims(draws);
    for (auto& s : sims) {
        s = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double g = n(rng);
            s += w(i) * g * g;
        }
    }
    // Three-moment fit; only the upper tail is tight.
    for (double stat : {6.0, 9.0, 12.0}) {
        const double mc = static_cast<double>(std::count_if(sims.begin(), sims.end(), [&](double s) { return s > stat; })) / draws;
        EXPECT_NEAR(weighted_chisq_sf(w, stat, NullApprox::hbe), mc, 0.01);
    }
}

TEST(MedianHeuristic, SmallCases) {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 1.0, 3.0;
    EXPECT_DOUBLE_EQ(median_heuristic(x), 2.0);
    Eigen::MatrixXd y(4, 1);
    y << 0.0, 1.0, 3.0, 7.0;  // distances 1 2 3 4 6 7
    EXPECT_DOUBLE_EQ(median_heuristic(y), 3.5);
    EXPECT_DOUBLE_EQ(median_heuristic(Eigen::MatrixXd::Zero(4, 2)), 1.0);
}

TEST(FourierFeatures, ExplicitWeights) {
    Eigen::MatrixXd x(2, 1);
    x << 0.0, 1.0;
    Eigen::MatrixXd w(1, 2);
    w << 1.0, 2.0;
    Eigen::VectorXd b(2);
    b << 0.0, 0.5;
    const auto f = fourier_features(x, w, b, 2.0);
    EXPECT_NEAR(f(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(f(1, 1), std::cos(1.0 + 0.5), 1e-15);
    EXPECT_NEAR(f(1, 0), std::cos(0.5), 1e-15);
}

TEST(Rcot, DeterministicForSeed) {
    std::mt19937_64 rng(1);
    const auto x = normals(300, rng);
    const auto y = normals(300, rng);
    const Eigen::MatrixXd z = normals(300, rng);
    RcotConfig cfg;
    cfg.seed = Seed{42};
    const auto a = rcot(x, y, z, cfg);
    const auto b = rcot(x, y, z, cfg);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(a.statistic, b.statistic);
}

TEST(Rcot, DetectsDependence) {
    std::mt19937_64 rng(2);
    const auto x = normals(500, rng);
    const Eigen::VectorXd y = x.array().square().matrix() + 0.3 * normals(500, rng);
    RcotConfig cfg;
    cfg.seed = Seed{3};
    EXPECT_LT(rcot(x, y, Eigen::MatrixXd(), cfg).p_value, 1e-3);
}

TEST(Rcot, ConditioningRemovesChainDependence) {
    std::mt19937_64 rng(4);
    const auto z = normals(1000, rng);
    const Eigen::VectorXd x = z + 0.5 * normals(1000, rng);
    const Eigen::VectorXd y = z + 0.5 * normals(1000, rng);
    RcotConfig cfg;
    cfg.seed = Seed{5};
    EXPECT_LT(rcot(x, y, Eigen::MatrixXd(), cfg).p_value, 1e-6);
    EXPECT_GT(rcot(x, y, Eigen::MatrixXd(z), cfg).p_value, 0.01);
}

TEST(Rcot, ConstantColumnIsIndependent) {
    std::mt19937_64 rng(6);
    const auto x = normals(100, rng);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(100, 2.0);
    EXPECT_EQ(rcot(x, y, Eigen::MatrixXd(), RcotConfig{}).p_value, 1.0);
}

TEST(QuerySeed, IgnoresArgumentOrder) {
    const Seed run{8};
    EXPECT_EQ(query_seed(run, "a", "b", {"c", "d"}).value, query_seed(run, "b", "a", {"d", "c"}).value);
    EXPECT_NE(query_seed(run, "a", "b", {"c"}).value, query_seed(run, "a", "c", {"b"}).value);
}

TEST(RcotTest, SymmetricAndLayoutIndependent) {
    std::mt19937_64 rng(9);
    Eigen::MatrixXd m(400, 3);
    m.col(0) = normals(400, rng);
    m.col(1) = m.col(0) + normals(400, rng);
    m.col(2) = normals(400, rng);
    const Dataset d({"a", "b", "c"}, m);
    Eigen::MatrixXd swapped(400, 3);
    swapped << m.col(2), m.col(1), m.col(0);
    const Dataset e({"c", "b", "a"}, swapped);
    RcotConfig cfg;
    cfg.seed = Seed{10};
    RcotTest t1(d, cfg);
    RcotTest t2(e, cfg);
    const std::vector<int> z1{2};
    const std::vector<int> z2{0};
    EXPECT_EQ(t1.pvalue(0, 1, z1), t1.pvalue(1, 0, z1));
    EXPECT_EQ(t1.pvalue(0, 1, z1), t2.pvalue(2, 1, z2));
}
