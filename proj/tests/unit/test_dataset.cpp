#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "kdetl/dataset.hpp"
#include "kdetl/error.hpp"

using namespace kdetl;

TEST(Dataset, RejectsDuplicatesAndNonFinite) {
    EXPECT_THROW(Dataset({"a", "a"}, Eigen::MatrixXd::Zero(2, 2)), Error);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 1);
    m(1, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Dataset({"a"}, m), Error);
    EXPECT_THROW(Dataset({"a", "b"}, Eigen::MatrixXd::Zero(2, 3)), Error);
}

TEST(Dataset, GatherReorderHead) {
    Eigen::MatrixXd m(3, 3);
    m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const Dataset d({"x", "y", "z"}, m);
    const std::vector<std::size_t> rows{2, 0};
    const std::vector<int> cols{1};
    const auto g = d.gather(rows, cols);
    EXPECT_EQ(g(0, 0), 8);
    EXPECT_EQ(g(1, 0), 2);
    const auto r = d.reorder({"z", "x", "y"});
    EXPECT_EQ(r.column(0)(0), 3);
    EXPECT_EQ(d.head(2).rows(), 2u);
    EXPECT_THROW(d.head(4), Error);
    EXPECT_THROW(d.reorder({"x", "y"}), Error);
    EXPECT_THROW(d.index_of("w"), Error);
}

TEST(Csv, ParsesAndDropsBadRows) {
    const auto d = parse_csv("a,b\n1,2\n3,\nfoo,4\n5,6.5\n7,nan\n");
    EXPECT_EQ(d.rows(), 2u);
    EXPECT_EQ(d.values()(1, 1), 6.5);
    EXPECT_THROW(parse_csv(""), Error);
    EXPECT_THROW(parse_csv("a,b\nx,y\n"), Error);
    EXPECT_THROW(parse_csv("a,a\n1,2\n"), Error);
}

TEST(Csv, RoundTripIsExact) {
    Eigen::MatrixXd m(2, 2);
    m << 0.1, -1e-300, 3.141592653589793, 12345678.9;
    const Dataset d({"p", "q"}, m);
    EXPECT_EQ(parse_csv(to_csv(d)).values(), m);
    const auto path = std::filesystem::temp_directory_path() / "kdetl_roundtrip.csv";
    write_csv(d, path);
    EXPECT_EQ(load_csv(path).values(), m);
    std::filesystem::remove(path);
    EXPECT_THROW(load_csv("/nonexistent/x.csv"), Error);
}

TEST(Folds, DeterministicAndBalanced) {
    const auto a = kfold_indices(10, 3, Seed{1});
    const auto b = kfold_indices(10, 3, Seed{1});
    EXPECT_EQ(a.folds, b.folds);
    std::set<std::size_t> all;
    for (const auto& f : a.folds) {
        EXPECT_GE(f.size(), 3u);
        EXPECT_LE(f.size(), 4u);
        all.insert(f.begin(), f.end());
    }
    EXPECT_EQ(all.size(), 10u);
    EXPECT_THROW(kfold_indices(2, 3, Seed{1}), Error);
}

TEST(Holdout, DisjointSplit) {
    Eigen::MatrixXd m(20, 1);
    for (int i = 0; i < 20; ++i) m(i, 0) = i;
    const auto [train, test] = holdout_split(Dataset({"v"}, m), 5, Seed{2});
    EXPECT_EQ(train.rows(), 15u);
    EXPECT_EQ(test.rows(), 5u);
    std::set<double> seen;
    for (std::size_t i = 0; i < 15; ++i) seen.insert(train.values()(i, 0));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_FALSE(seen.count(test.values()(i, 0)));
}

TEST(Seed, DerivationIsStable) {
    const Seed s{42};
    EXPECT_EQ(s.derive("a").value, s.derive("a").value);
    EXPECT_NE(s.derive("a").value, s.derive("b").value);
    EXPECT_NE(s.derive(std::uint64_t{1}).value, s.derive(std::uint64_t{2}).value);
    EXPECT_NE(s.derive("repeat", 0).value, s.derive("repeat", 1).value);
}
