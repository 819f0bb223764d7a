#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"
#include "kdetl/rng.hpp"

namespace kdetl {

enum class NullApprox { hbe, gamma2 };

struct RcotConfig {
    std::size_t num_features_xy = 5;
    std::size_t num_features_z = 25;
    NullApprox null_approx = NullApprox::hbe;
    Seed seed{};
};

struct CiResult {
    double p_value = 1.0;
    double statistic = 0.0;
};

// Median pairwise Euclidean distance over the first (at most) 500 rows;
// 1.0 when every pair coincides.
double median_heuristic(const Eigen::MatrixXd& block);

// sqrt(2/num) * cos(data * w / sigma + b), w standard normal (d x num), b
// uniform on [0, 2 pi).
Eigen::MatrixXd fourier_features(const Eigen::MatrixXd& data, std::size_t num, double sigma, Seed seed);
Eigen::MatrixXd fourier_features(const Eigen::MatrixXd& data, const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                                 double sigma);

// p-value of a weighted sum of chi-square(1) variables exceeding `statistic`.
double weighted_chisq_sf(const Eigen::VectorXd& weights, double statistic, NullApprox approx);

/// Randomized conditional correlation test of x _||_ y | z. An empty z block
/// runs the unconditional variant. Feature streams are cfg.seed.derive(1),
/// derive(2) and derive(3) for x, y and z.
CiResult rcot(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const RcotConfig& cfg);

/// Conditional-independence oracle interface consumed by PC. Variables are
/// node indices; z is sorted ascending.
class CiTest {
  public:
    virtual ~CiTest() = default;
    virtual const NodeSet& nodes() const = 0;
    virtual double pvalue(int x, int y, std::span<const int> z) = 0;
};

// Seed for one (x, y, z) query, independent of argument order and of how
// the columns are laid out in the dataset.
Seed query_seed(Seed run, const std::string& x, const std::string& y, std::vector<std::string> z);

/// RCoT over the columns of a dataset, memoized per query.
class RcotTest : public CiTest {
  public:
    RcotTest(const Dataset& data, RcotConfig cfg);
    // Evaluate queries phrased over `nodes` against `data` by name.
    RcotTest(const Dataset& data, const NodeSet& nodes, RcotConfig cfg);

    const NodeSet& nodes() const override { return nodes_; }
    double pvalue(int x, int y, std::span<const int> z) override;
    CiResult test(int x, int y, std::span<const int> z);

  private:
    const Dataset& data_;
    NodeSet nodes_;
    std::vector<int> columns_;
    RcotConfig cfg_;
    std::mutex mutex_;
    std::map<std::tuple<int, int, std::vector<int>>, CiResult> cache_;
};

}  // namespace kdetl
