#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "kdetl/error.hpp"
#include "kdetl/synthetic.hpp"

using namespace kdetl;

namespace {

struct Counts {
    std::size_t nodes, arcs, indegree;
};

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double mx = x.mean();
    const double my = y.mean();
    return ((x.array() - mx) * (y.array() - my)).sum() / (x.array() - mx).square().sum();
}

std::set<std::pair<std::string, std::string>> arc_names(const Dag& g) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& a : g.arcs()) out.insert({g.nodes().name(a.parent), g.nodes().name(a.child)});
    return out;
}

std::size_t graph_diff(const Dag& a, const Dag& b) {
    const auto x = arc_names(a);
    const auto y = arc_names(b);
    std::size_t d = 0;
    for (const auto& e : x) d += !y.count(e);
    return d;
}

// Random linear-Gaussian network text with exactly the given counts: node
// `hub` takes `indegree` parents, the remaining arcs are spread over later
// nodes with at most `indegree` parents each.
std::string random_lgbn(std::size_t nodes, std::size_t arcs, std::size_t indegree, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> parents(nodes);
    const std::size_t hub = nodes - 1;
    for (std::size_t p = 0; p < indegree; ++p) parents[hub].push_back(p);
    std::size_t placed = indegree;
    while (placed < arcs) {
        const std::size_t c = 1 + rng() % (nodes - 2);
        if (parents[c].size() >= indegree - 1) continue;
        const std::size_t p = rng() % c;
        if (std::find(parents[c].begin(), parents[c].end(), p) != parents[c].end()) continue;
        parents[c].push_back(p);
        ++placed;
    }
    std::ostringstream out;
    out << "# generated\n";
    for (std::size_t v = 0; v < nodes; ++v) {
        out << "X" << v << ": intercept " << (v % 3) << ", var 1.5";
        for (std::size_t p : parents[v]) out << ", X" << p << " 0.25";
        out << '\n';
    }
    for (std::size_t v = 0; v < nodes; ++v)
        for (std::size_t p : parents[v]) out << "arc X" << p << " X" << v << '\n';
    return out.str();
}

}  // namespace

TEST(Spbn, TableCounts) {
    const std::vector<Counts> expected{{7, 10, 3}, {13, 21, 5}, {8, 7, 1}, {15, 14, 1}};
    for (int id = 1; id <= 4; ++id) {
        const auto net = build_spbn(id);
        const auto& e = expected[static_cast<std::size_t>(id - 1)];
        EXPECT_EQ(net.dag.size(), e.nodes) << id;
        EXPECT_EQ(net.dag.num_arcs(), e.arcs) << id;
        EXPECT_EQ(net.dag.max_indegree(), e.indegree) << id;
        EXPECT_NO_THROW(net.validate());
    }
    EXPECT_THROW(build_spbn(5), Error);
}

TEST(Spbn, SampledMoments) {
    const auto d1 = sample(build_spbn(1), 100000, Seed{1});
    EXPECT_NEAR(mean(d1.column(d1.index_of("A"))), 3.0, 0.05);
    EXPECT_NEAR(slope(d1.column(d1.index_of("A")), d1.column(d1.index_of("B"))), 0.5, 0.02);
    const auto d3 = sample(build_spbn(3), 100000, Seed{2});
    EXPECT_NEAR(mean(d3.column(d3.index_of("A"))), 2.5, 0.05);
}

TEST(Spbn, ProductTermMean) {
    // D: 0.5 N(0.5 c b, 1) + 0.5 N(3.5, 1); E[D] = 0.25 E[CB] + 1.75.
    const auto d = sample(build_spbn(1), 200000, Seed{3});
    const Eigen::ArrayXd cb = d.column(d.index_of("C")).array() * d.column(d.index_of("B")).array();
    EXPECT_NEAR(d.column(d.index_of("D")).mean(), 0.25 * cb.mean() + 1.75, 0.05);
}

TEST(Sample, NodeStreamsDependOnlyOnAncestors) {
    auto net = build_spbn(1);
    const auto a = sample(net, 500, Seed{4});
    // Changing a leaf's equation leaves every other column untouched.
    net.equations[static_cast<std::size_t>(net.dag.nodes().index_of("G"))].components[0].stddev = 9.0;
    const auto b = sample(net, 500, Seed{4});
    for (const char* name : {"A", "B", "C", "D", "E", "F"}) {
        EXPECT_EQ(a.column(a.index_of(name)), b.column(b.index_of(name)));
    }
    EXPECT_NE(a.column(a.index_of("G")), b.column(b.index_of("G")));
}

TEST(ModifyArcs, ZeroFractionIsIdentity) {
    const auto net = build_spbn(2);
    const auto out = modify_arcs(net, {0.0, 0, 1, Seed{5}});
    EXPECT_EQ(out.dag, net.dag);
}

TEST(ModifyArcs, TenPercentOfSpbn1MovesOneArc) {
    const auto net = build_spbn(1);
    for (std::uint64_t s = 0; s < 20; ++s) {
        ModificationLog log;
        const auto out = modify_arcs(net, {0.1, 0, 1, Seed{s}}, &log);
        EXPECT_EQ(graph_diff(net.dag, out.dag), 1u);
        EXPECT_EQ(log.removed.size(), 1u);
        EXPECT_EQ(out.dag.num_arcs(), 10u);
        EXPECT_NO_THROW(out.validate());
    }
}

TEST(ModifyArcs, FullFractionOnSpbn3) {
    const auto net = build_spbn(3);
    for (std::uint64_t s = 0; s < 10; ++s) {
        ModificationLog log;
        const auto out = modify_arcs(net, {1.0, 0, 1, Seed{s}}, &log);
        EXPECT_EQ(log.removed.size(), 7u);
        EXPECT_EQ(out.dag.num_arcs(), 7u - log.messages.size());
        EXPECT_EQ(log.added.size() + log.messages.size(), 7u);
    }
}

TEST(ModifyArcs, DeterministicPerSeed) {
    const auto net = build_spbn(2);
    const auto a = modify_arcs(net, {0.3, 0, 1, Seed{6}});
    const auto b = modify_arcs(net, {0.3, 0, 1, Seed{6}});
    EXPECT_EQ(a.dag, b.dag);
    EXPECT_EQ(sample(a, 50, Seed{7}).values(), sample(b, 50, Seed{7}).values());
    EXPECT_THROW(modify_arcs(net, {1.5, 0, 1, Seed{6}}), Error);
}

TEST(AddNoise, VarianceGrowsByOne) {
    const auto d = sample(build_spbn(3), 100000, Seed{8});
    const auto n = add_noise(d, {0, 0, 1, Seed{9}});
    for (std::size_t c = 0; c < d.cols(); ++c) {
        auto var = [](const Eigen::VectorXd& v) { return (v.array() - v.mean()).square().sum() / (v.size() - 1); };
        const Eigen::VectorXd x = d.column(c);
        const Eigen::VectorXd y = n.column(c);
        const Eigen::VectorXd e = y - x;
        EXPECT_NEAR(var(e), 1.0, 0.05);
        EXPECT_NEAR(e.mean(), 0.0, 0.02);
    }
    EXPECT_EQ(add_noise(d, {0, 0, 0, Seed{9}}).values(), d.values());
    EXPECT_EQ(add_noise(d, {0, 0, 1, Seed{9}}).values(), n.values());
}

TEST(Lgbn, SingleNode) {
    const auto net = parse_lgbn("X: intercept 0, var 1\n");
    const auto d = sample(net, 100000, Seed{10});
    EXPECT_NEAR(d.column(0).mean(), 0.0, 0.02);
    EXPECT_NEAR((d.column(0).array() - d.column(0).mean()).square().mean(), 1.0, 0.02);
}

TEST(Lgbn, ParsesCoefficientsAndArcs) {
    const auto net = parse_lgbn("node a: intercept 1, var 4\nb: intercept -2, var 0.25, a 3\narc a b\n");
    ASSERT_EQ(net.dag.size(), 2u);
    EXPECT_TRUE(net.dag.has_arc(0, 1));
    const auto& c = net.equations[1].components[0];
    EXPECT_DOUBLE_EQ(c.intercept, -2.0);
    EXPECT_DOUBLE_EQ(c.stddev, 0.5);
    EXPECT_DOUBLE_EQ(c.terms.at(0).coef, 3.0);
    EXPECT_EQ(parse_lgbn(format_lgbn(net)).dag, net.dag);
}

TEST(Lgbn, Errors) {
    EXPECT_THROW(parse_lgbn("a: intercept 0, var 1\nb: intercept 0, var 1, a 2\n"), Error);
    EXPECT_THROW(parse_lgbn("a: intercept 0\n"), Error);
    EXPECT_THROW(parse_lgbn("a: intercept 0, var 1\na: intercept 0, var 1\n"), Error);
    EXPECT_THROW(parse_lgbn("a: intercept 0, var 1\narc a z\n"), Error);
    EXPECT_THROW(parse_lgbn(""), Error);
    try {
        parse_lgbn("a: intercept 0, var 1\nb: intercept 0, var 1, a 2\n");
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "non-parent-coefficient");
    }
}

TEST(Lgbn, RealWorldSizedNetworks) {
    const std::vector<Counts> sizes{{44, 66, 9}, {64, 102, 11}};
    for (const auto& s : sizes) {
        const auto net = parse_lgbn(random_lgbn(s.nodes, s.arcs, s.indegree, 11));
        EXPECT_EQ(net.dag.size(), s.nodes);
        EXPECT_EQ(net.dag.num_arcs(), s.arcs);
        EXPECT_EQ(net.dag.max_indegree(), s.indegree);
    }
}
