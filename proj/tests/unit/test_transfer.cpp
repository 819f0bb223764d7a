#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kdetl/error.hpp"
#include "kdetl/kde.hpp"
#include "kdetl/transfer.hpp"

using namespace kdetl;

namespace {

Eigen::VectorXd normals(Eigen::Index n, double mean, double sd, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mean, sd);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
    return v;
}

double kde_density(const Eigen::VectorXd& pts, double h, double x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < pts.size(); ++i) {
        const double u = (x - pts(i)) / std::sqrt(h);
        s += std::exp(-0.5 * u * u);
    }
    return s / (pts.size() * std::sqrt(2.0 * std::numbers::pi * h));
}

// Composite Simpson over a wide interval with densities evaluated directly.
double js_oracle(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    const double hp = normal_reference_bandwidth(Eigen::MatrixXd(p))(0, 0);
    const double hq = normal_reference_bandwidth(Eigen::MatrixXd(q))(0, 0);
    const double pad = 12.0 * std::sqrt(std::max(hp, hq));
    const double lo = std::min(p.minCoeff(), q.minCoeff()) - pad;
    const double hi = std::max(p.maxCoeff(), q.maxCoeff()) + pad;
    const int n = 40000;
    const double step = (hi - lo) / n;
    auto term = [&](double x) {
        const double a = kde_density(p, hp, x);
        const double b = kde_density(q, hq, x);
        const double m = 0.5 * (a + b);
        double t = 0.0;
        if (a > 0) t += 0.5 * a * std::log(a / m);
        if (b > 0) t += 0.5 * b * std::log(b / m);
        return t;
    };
    double s = term(lo) + term(hi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * term(lo + i * step);
    return s * step / 3.0;
}

Dataset table(std::size_t rows, std::size_t cols, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = d(rng);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < cols; ++j) names.push_back("v" + std::to_string(j));
    return Dataset(names, m);
}

}  // namespace

TEST(Quantile, TypeSeven) {
    EXPECT_DOUBLE_EQ(quantile_type7({1, 2, 3, 4}, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(quantile_type7({4, 1, 3, 2}, 0.75), 3.25);
    EXPECT_DOUBLE_EQ(quantile_type7({0.5, 0.6, 50}, 0.75), 25.3);
    EXPECT_DOUBLE_EQ(quantile_type7({7}, 0.3), 7.0);
}

TEST(Psi, ThreeSourcesNoneFenced) {
    // Q1 = 0.55, Q3 = 25.3, fence 62.425: 50 stays.
    const auto w = psi({0.5, 0.6, 50});
    ASSERT_EQ(w.size(), 3u);
    EXPECT_NEAR(w[0], 2.0, 1e-12);
    EXPECT_NEAR(w[1], 1.0 / 0.6, 1e-12);
    EXPECT_NEAR(w[2], 0.02, 1e-12);
}

TEST(Psi, OutlierFenced) {
    const auto w = psi({1, 1, 1, 1, 100});
    EXPECT_DOUBLE_EQ(w[4], 0.0);
    EXPECT_DOUBLE_EQ(w[0], 1.0);
}

TEST(Psi, ZeroDivergenceCapped) {
    const auto w = psi({0.0, 1.0});
    EXPECT_EQ(w[0], kPsiCap);
    EXPECT_EQ(w[1], 1.0);
}

TEST(NormalizeWeights, UnitSumOrZeros) {
    const auto w = normalize_weights({2.0, 1.0, 0.0});
    EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-15);
    const auto z = normalize_weights({0.0, 0.0});
    EXPECT_EQ(z[0], 0.0);
}

TEST(JsDivergence, IdenticalSamplesAreZero) {
    const auto p = normals(300, 0, 1, 1);
    EXPECT_NEAR(js_divergence(p, p), 0.0, 1e-9);
}

TEST(JsDivergence, SymmetricAndBounded) {
    const auto p = normals(300, 0, 1, 2);
    const auto q = normals(200, 1.5, 2, 3);
    EXPECT_NEAR(js_divergence(p, q), js_divergence(q, p), 1e-12);
    const auto far = normals(200, 500, 1, 4);
    EXPECT_NEAR(js_divergence(p, far), std::log(2.0), 1e-3);
    EXPECT_LE(js_divergence(p, far), std::log(2.0));
}

TEST(JsDivergence, MatchesDirectQuadrature) {
    const auto p = normals(150, 0, 1, 5);
    const auto q = normals(180, 1, 1.5, 6);
    EXPECT_NEAR(js_divergence(p, q), js_oracle(p, q), 1e-4);
    const auto r = normals(40, -2, 0.5, 7);
    EXPECT_NEAR(js_divergence(p, r), js_oracle(p, r), 1e-4);
}

TEST(TransferContext, EtaIsTargetOverMeanKeptSource) {
    const auto target = table(25, 2, 11);
    Eigen::MatrixXd js(2, 2);
    js << 0.1, 0.1, 0.2, 0.2;
    TransferContext ctx(target, {table(3000, 2, 12), table(1000, 2, 13)}, js);
    EXPECT_TRUE(ctx.enabled());
    EXPECT_EQ(ctx.kept().size(), 2u);
    EXPECT_NEAR(ctx.eta(), 25.0 / 2000.0, 1e-15);
    const std::vector<int> vars{0, 1};
    EXPECT_NEAR(ctx.sjs(0, vars), 0.2, 1e-15);
    const auto w = ctx.source_weights(vars);
    EXPECT_NEAR(w[0], 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(ctx.with_eta(1.0).eta(), 1.0, 0.0);
    EXPECT_NEAR(ctx.with_eta(7.0).eta(), 1.0, 0.0);
}

TEST(TransferContext, EtaClampedToOne) {
    Eigen::MatrixXd js(1, 1);
    js << 0.3;
    TransferContext ctx(table(500, 1, 21), {table(100, 1, 22)}, js);
    EXPECT_EQ(ctx.eta(), 1.0);
}

TEST(TransferContext, FencedSourceGetsNoWeight) {
    Eigen::MatrixXd js(5, 1);
    js << 0.1, 0.1, 0.1, 0.1, 0.69;
    std::vector<Dataset> sources;
    for (unsigned s = 0; s < 5; ++s) sources.push_back(table(100 + 100 * s, 1, 30 + s));
    TransferContext ctx(table(50, 1, 29), sources, js);
    EXPECT_EQ(ctx.kept().size(), 4u);
    // mean over kept sources (100, 200, 300, 400)
    EXPECT_NEAR(ctx.eta(), 50.0 / 250.0, 1e-15);
    const std::vector<int> vars{0};
    const auto w = ctx.source_weights(vars);
    EXPECT_EQ(w[4], 0.0);
    EXPECT_NEAR(w[0], 0.25, 1e-12);
}

TEST(TransferContext, BuildReordersSourcesAndComputesJs) {
    const auto target = table(60, 2, 41);
    const auto src = table(80, 2, 42).reorder({"v1", "v0"});
    const auto ctx = TransferContext::build(target, {src});
    EXPECT_EQ(ctx.sources()[0].names(), target.names());
    EXPECT_NEAR(ctx.per_variable_js()(0, 0),
                js_divergence(target.column(0), ctx.sources()[0].column(0)), 1e-15);
    EXPECT_THROW(TransferContext::build(target, {table(80, 3, 43)}), Error);
}
