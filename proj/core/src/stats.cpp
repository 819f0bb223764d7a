#include "kdetl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "kdetl/error.hpp"

namespace kdetl {

Eigen::MatrixXd rank_blocks(const Eigen::MatrixXd& values, Direction direction) {
    Eigen::MatrixXd ranks(values.rows(), values.cols());
    const auto a = static_cast<std::size_t>(values.cols());
    for (Eigen::Index b = 0; b < values.rows(); ++b) {
        std::vector<std::size_t> order(a);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto key = [&](std::size_t j) {
            const double v = values(b, static_cast<Eigen::Index>(j));
            return direction == Direction::higher_better ? -v : v;
        };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return key(x) < key(y); });
        for (std::size_t i = 0; i < a;) {
            std::size_t j = i;
            while (j + 1 < a && key(order[j + 1]) == key(order[i])) ++j;
            const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) ranks(b, static_cast<Eigen::Index>(order[k])) = mid;
            i = j + 1;
        }
    }
    return ranks;
}

FriedmanResult friedman(const Eigen::MatrixXd& values, Direction direction) {
    if (values.rows() < 2 || values.cols() < 2) throw Error("insufficient-blocks", "Friedman needs B >= 2 and A >= 2");
    const Eigen::MatrixXd ranks = rank_blocks(values, direction);
    const double b = static_cast<double>(values.rows());
    const double a = static_cast<double>(values.cols());
    FriedmanResult out;
    out.mean_ranks = ranks.colwise().mean().transpose();
    const Eigen::VectorXd sums = ranks.colwise().sum().transpose();
    const double expected = b * (a + 1.0) / 2.0;
    const double numer = (a - 1.0) * (sums.array() - expected).square().sum();
    const double denom = ranks.array().square().sum() - b * a * (a + 1.0) * (a + 1.0) / 4.0;
    if (!(denom > 1e-12)) return out;
    out.statistic = std::max(0.0, numer / denom);
    boost::math::chi_squared chi(a - 1.0);
    out.p_value = std::clamp(boost::math::cdf(boost::math::complement(chi, out.statistic)), 0.0, 1.0);
    return out;
}

bool PairwiseResult::is_rejected(int i, int j) const {
    if (i > j) std::swap(i, j);
    return std::find(rejected.begin(), rejected.end(), std::pair{i, j}) != rejected.end();
}

std::size_t pair_index(int i, int j, int num_algorithms) {
    if (i > j) std::swap(i, j);
    std::size_t idx = 0;
    for (int r = 0; r < i; ++r) idx += static_cast<std::size_t>(num_algorithms - r - 1);
    return idx + static_cast<std::size_t>(j - i - 1);
}

namespace {

void partitions(int next, int n, std::vector<int>& block_of, int blocks, std::vector<std::vector<int>>& out) {
    if (next == n) {
        out.push_back(block_of);
        return;
    }
    for (int b = 0; b <= blocks; ++b) {
        block_of[static_cast<std::size_t>(next)] = b;
        partitions(next + 1, n, block_of, std::max(blocks, b + 1), out);
    }
}

}  // namespace

std::vector<std::vector<std::size_t>> exhaustive_sets(int num_algorithms) {
    if (num_algorithms < 2 || num_algorithms > 9) {
        throw Error("too-many-algorithms", "exhaustive sets are enumerated for 2..9 algorithms");
    }
    std::vector<std::vector<int>> parts;
    std::vector<int> block_of(static_cast<std::size_t>(num_algorithms), 0);
    partitions(0, num_algorithms, block_of, 0, parts);
    std::vector<std::vector<std::size_t>> out;
    for (const auto& p : parts) {
        std::vector<std::size_t> set;
        for (int i = 0; i < num_algorithms; ++i) {
            for (int j = i + 1; j < num_algorithms; ++j) {
                if (p[static_cast<std::size_t>(i)] == p[static_cast<std::size_t>(j)]) {
                    set.push_back(pair_index(i, j, num_algorithms));
                }
            }
        }
        if (!set.empty()) out.push_back(std::move(set));
    }
    return out;
}

Eigen::MatrixXd pairwise_pvalues(const Eigen::VectorXd& mean_ranks, std::size_t blocks) {
    const auto a = mean_ranks.size();
    const double ad = static_cast<double>(a);
    const double se = std::sqrt(ad * (ad + 1.0) / (6.0 * static_cast<double>(blocks)));
    boost::math::normal normal;
    Eigen::MatrixXd p = Eigen::MatrixXd::Ones(a, a);
    for (Eigen::Index i = 0; i < a; ++i) {
        for (Eigen::Index j = i + 1; j < a; ++j) {
            const double z = std::abs(mean_ranks(i) - mean_ranks(j)) / se;
            p(i, j) = p(j, i) = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(normal, z)));
        }
    }
    return p;
}

PairwiseResult bergmann_hommel(const Eigen::VectorXd& mean_ranks, std::size_t blocks, double alpha) {
    const int a = static_cast<int>(mean_ranks.size());
    if (blocks < 1) throw Error("insufficient-blocks", "post-hoc needs at least one block");
    PairwiseResult out;
    out.alpha = alpha;
    out.raw_p = pairwise_pvalues(mean_ranks, blocks);
    const auto sets = exhaustive_sets(a);

    std::vector<double> p_of;
    for (int i = 0; i < a; ++i) {
        for (int j = i + 1; j < a; ++j) p_of.push_back(out.raw_p(i, j));
    }
    std::vector<double> adjusted(p_of.size(), 0.0);
    for (const auto& set : sets) {
        double lo = 1.0;
        for (std::size_t h : set) lo = std::min(lo, p_of[h]);
        const double value = std::min(1.0, static_cast<double>(set.size()) * lo);
        for (std::size_t h : set) adjusted[h] = std::max(adjusted[h], value);
    }
    out.adjusted_p = Eigen::MatrixXd::Ones(a, a);
    for (int i = 0; i < a; ++i) {
        for (int j = i + 1; j < a; ++j) {
            const double v = adjusted[pair_index(i, j, a)];
            out.adjusted_p(i, j) = out.adjusted_p(j, i) = v;
            if (v <= alpha) out.rejected.emplace_back(i, j);
        }
    }
    return out;
}

std::vector<std::vector<int>> cd_groups(const Eigen::VectorXd& mean_ranks, const PairwiseResult& pairs) {
    const int a = static_cast<int>(mean_ranks.size());
    auto clique = [&](unsigned mask) {
        for (int i = 0; i < a; ++i) {
            for (int j = i + 1; j < a; ++j) {
                if ((mask >> i & 1U) && (mask >> j & 1U) && pairs.is_rejected(i, j)) return false;
            }
        }
        return true;
    };
    std::vector<unsigned> cliques;
    for (unsigned mask = 1; mask < (1U << a); ++mask) {
        if (clique(mask)) cliques.push_back(mask);
    }
    std::vector<std::vector<int>> out;
    for (unsigned m : cliques) {
        const bool maximal = std::none_of(cliques.begin(), cliques.end(),
                                          [&](unsigned o) { return o != m && (o & m) == m; });
        if (!maximal) continue;
        std::vector<int> members;
        for (int i = 0; i < a; ++i) {
            if (m >> i & 1U) members.push_back(i);
        }
        std::stable_sort(members.begin(), members.end(),
                         [&](int x, int y) { return mean_ranks(x) < mean_ranks(y); });
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(), [&](const std::vector<int>& x, const std::vector<int>& y) {
        for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k) {
            if (mean_ranks(x[k]) != mean_ranks(y[k])) return mean_ranks(x[k]) < mean_ranks(y[k]);
        }
        return x.size() > y.size();
    });
    return out;
}

}  // namespace kdetl
