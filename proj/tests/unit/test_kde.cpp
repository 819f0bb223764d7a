#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kdetl/error.hpp"
#include "kdetl/kde.hpp"

using namespace kdetl;

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
    return m;
}

// Direct evaluation: mean over points of N(q; x_j, H).
double naive_logpdf(const Eigen::MatrixXd& points, const Eigen::MatrixXd& h, const Eigen::RowVectorXd& q) {
    const Eigen::MatrixXd inv = h.inverse();
    const double d = static_cast<double>(h.rows());
    const double norm = std::pow(2.0 * std::numbers::pi, -d / 2.0) / std::sqrt(h.determinant());
    double sum = 0.0;
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
        const Eigen::RowVectorXd diff = q - points.row(j);
        sum += norm * std::exp(-0.5 * (diff * inv * diff.transpose())(0, 0));
    }
    return std::log(sum / static_cast<double>(points.rows()));
}

}  // namespace

TEST(Bandwidth, OneDimensionalClosedForm) {
    Eigen::MatrixXd x(4, 1);
    x << 0.0, 1.0, 2.0, 4.0;
    // mean 1.75, unbiased variance 8.75 / 3, factor (4/3)^(2/5) 4^(-2/5)
    const double expected = (8.75 / 3.0) * std::pow(4.0 / 3.0, 0.4) * std::pow(4.0, -0.4);
    const auto h = normal_reference_bandwidth(x);
    EXPECT_NEAR(h(0, 0), expected, 1e-12);
}

TEST(Bandwidth, TwoDimensionalClosedForm) {
    Eigen::MatrixXd x(3, 2);
    x << 0.0, 0.0, 1.0, 2.0, 2.0, 1.0;
    // covariance [[1, 0.5], [0.5, 1]], factor (4/4)^(1/3) 3^(-1/3)
    const double f = std::pow(3.0, -1.0 / 3.0);
    const auto h = normal_reference_bandwidth(x);
    EXPECT_NEAR(h(0, 0), f, 1e-12);
    EXPECT_NEAR(h(0, 1), 0.5 * f, 1e-12);
    EXPECT_NEAR(h(1, 1), f, 1e-12);
}

TEST(Bandwidth, JitterOnlyWhenSingular) {
    Eigen::MatrixXd x(5, 2);
    x.col(0) << 1, 2, 3, 4, 5;
    x.col(1) = 2.0 * x.col(0);
    const auto h = normal_reference_bandwidth(x);
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(h).info(), Eigen::Success);
    Eigen::MatrixXd y = normal_matrix(50, 2, 3);
    const Eigen::RowVectorXd mean = y.colwise().mean();
    const Eigen::MatrixXd c = y.rowwise() - mean;
    const Eigen::MatrixXd cov = c.transpose() * c / 49.0;
    const double f = std::pow(4.0 / 4.0, 2.0 / 6.0) * std::pow(50.0, -2.0 / 6.0);
    EXPECT_LT((normal_reference_bandwidth(y) - f * cov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Bandwidth, NeedsEnoughRows) {
    EXPECT_THROW(normal_reference_bandwidth(Eigen::MatrixXd::Zero(2, 2)), Error);
}

TEST(Kde, TwoPointValue) {
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 2.0;
    const KdeModel m(pts, Eigen::MatrixXd::Identity(1, 1));
    Eigen::MatrixXd q(1, 1);
    q << 1.0;
    EXPECT_NEAR(m.logpdf(q)(0), -1.4189385332046727, 1e-12);
}

TEST(Kde, OneDimensionalDensityIntegratesToOne) {
    for (unsigned seed : {1u, 2u, 3u}) {
        const auto m = KdeModel::fit(normal_matrix(200, 1, seed));
        const double sd = std::sqrt(m.bandwidth()(0, 0));
        const double lo = m.points().minCoeff() - 10 * sd;
        const double hi = m.points().maxCoeff() + 10 * sd;
        const Eigen::Index n = 20001;
        Eigen::MatrixXd grid(n, 1);
        for (Eigen::Index i = 0; i < n; ++i) grid(i, 0) = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        const Eigen::VectorXd f = m.logpdf(grid).array().exp();
        const double step = (hi - lo) / (n - 1);
        const double integral = step * (f.sum() - 0.5 * (f(0) + f(n - 1)));
        EXPECT_NEAR(integral, 1.0, 1e-3);
    }
}

TEST(Kde, MatchesNaiveEvaluationAcrossChunks) {
    const Eigen::MatrixXd pts = normal_matrix(120, 3, 11);
    const auto m = KdeModel::fit(pts);
    const Eigen::MatrixXd q = 1.5 * normal_matrix(600, 3, 12);
    const auto lp = m.logpdf(q);
    for (Eigen::Index i = 0; i < q.rows(); i += 37) {
        EXPECT_NEAR(lp(i), naive_logpdf(pts, m.bandwidth(), q.row(i)), 1e-9);
    }
}

TEST(Kde, FarQueriesStayFinite) {
    const auto m = KdeModel::fit(normal_matrix(50, 1, 5));
    Eigen::MatrixXd q(1, 1);
    q << 40.0;
    EXPECT_TRUE(std::isfinite(m.logpdf(q)(0)));
}

TEST(Ckde, JointIsConditionalPlusMarginal) {
    Eigen::MatrixXd joint = normal_matrix(80, 3, 21);
    joint.col(0) += 0.8 * joint.col(1) - 0.3 * joint.col(2);
    const CkdeCpd cpd("x", {"p", "q"}, joint);
    const Eigen::MatrixXd q = normal_matrix(40, 3, 22);
    const Eigen::VectorXd lhs = cpd.joint().logpdf(q);
    const Eigen::VectorXd rhs = cpd.logpdf(q) + cpd.marginal()->logpdf(q.rightCols(2));
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ckde, MarginalBandwidthIsFittedOnParentsAlone) {
    const Eigen::MatrixXd joint = normal_matrix(60, 2, 31);
    const CkdeCpd cpd("x", {"p"}, joint);
    EXPECT_NEAR(cpd.marginal()->bandwidth()(0, 0), normal_reference_bandwidth(joint.rightCols(1))(0, 0), 1e-14);
    EXPECT_NEAR(cpd.joint().bandwidth()(1, 1), normal_reference_bandwidth(joint)(1, 1), 1e-14);
}

TEST(Ckde, EmptyParentsEqualsUnconditionalKde) {
    const Eigen::MatrixXd x = normal_matrix(40, 1, 41);
    const CkdeCpd cpd("x", {}, x);
    EXPECT_EQ(cpd.marginal(), nullptr);
    const Eigen::MatrixXd q = normal_matrix(10, 1, 42);
    EXPECT_LT((cpd.logpdf(q) - KdeModel::fit(x).logpdf(q)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Ckde, IndependentParentLeavesChildMarginal) {
    const Eigen::MatrixXd joint = normal_matrix(3000, 2, 51);
    const CkdeCpd cpd("x", {"p"}, joint);
    const auto child = KdeModel::fit(joint.leftCols(1));
    const Eigen::MatrixXd q = 0.7 * normal_matrix(300, 2, 52);
    const double diff = (cpd.logpdf(q) - child.logpdf(q.leftCols(1))).mean();
    EXPECT_NEAR(diff, 0.0, 0.05);
}

TEST(Kdebn, DisconnectedNodesSumMarginals) {
    const Eigen::MatrixXd m = normal_matrix(50, 2, 61);
    const Dataset data({"a", "b"}, m);
    KdeBayesianNetwork bn{Dag({"a", "b"}), {CkdeCpd::fit(data, "a", {}), CkdeCpd::fit(data, "b", {})}};
    const double expected = KdeModel::fit(m.leftCols(1)).logpdf(m.leftCols(1)).sum() +
                            KdeModel::fit(m.rightCols(1)).logpdf(m.rightCols(1)).sum();
    EXPECT_NEAR(network_loglik(bn, data), expected, 1e-9);
}
