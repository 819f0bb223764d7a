#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace kdetl {

enum class Direction { higher_better, lower_better };

// Within-row ranks (1 = best) with midranks for ties. Rows are blocks,
// columns algorithms.
Eigen::MatrixXd rank_blocks(const Eigen::MatrixXd& values, Direction direction);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    Eigen::VectorXd mean_ranks;
};

// Tie-corrected Friedman chi-square with A-1 degrees of freedom.
FriedmanResult friedman(const Eigen::MatrixXd& values, Direction direction);

struct PairwiseResult {
    double alpha = 0.05;
    Eigen::MatrixXd raw_p;       // symmetric, 1 on the diagonal
    Eigen::MatrixXd adjusted_p;  // symmetric, 1 on the diagonal
    std::vector<std::pair<int, int>> rejected;  // i < j

    bool is_rejected(int i, int j) const;
};

// Index of pair (i, j), i < j, in the row-major upper triangle.
std::size_t pair_index(int i, int j, int num_algorithms);

/// Exhaustive sets over the (A choose 2) pairwise hypotheses: for each
/// partition of the algorithms into groups, the set of within-group pairs.
/// The empty set is omitted.
std::vector<std::vector<std::size_t>> exhaustive_sets(int num_algorithms);

/// Bergmann-Hommel post-hoc on mean ranks from B blocks. Pairwise
/// z = (R_i - R_j) / sqrt(A (A + 1) / (6 B)); adjusted p of hypothesis h is
/// min(1, max over exhaustive sets I containing h of |I| * min p over I).
PairwiseResult bergmann_hommel(const Eigen::VectorXd& mean_ranks, std::size_t blocks, double alpha);

// Unadjusted pairwise two-sided p-values.
Eigen::MatrixXd pairwise_pvalues(const Eigen::VectorXd& mean_ranks, std::size_t blocks);

/// Maximal groups of algorithms with no rejected pair among them. Members
/// are ordered by mean rank and groups by their best member.
std::vector<std::vector<int>> cd_groups(const Eigen::VectorXd& mean_ranks, const PairwiseResult& pairs);

}  // namespace kdetl
