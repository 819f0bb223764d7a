#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kdetl/dataset.hpp"
#include "kdetl/graph.hpp"

namespace kdetl {

/// Normal reference rule: (4/(d+2))^(2/(d+4)) * cov * M^(-2/(d+4)), with the
/// unbiased sample covariance. A near-singular covariance gets a jitter of
/// 1e-8 * trace/d on the diagonal. Requires M >= d+1.
Eigen::MatrixXd normal_reference_bandwidth(const Eigen::MatrixXd& data);

/// Multivariate Gaussian-kernel density estimate.
///
/// Training points are kept whitened by the bandwidth's Cholesky factor, so a
/// query costs one triangular solve plus a GEMM against the training block.
class KdeModel {
  public:
    KdeModel() = default;
    KdeModel(const Eigen::MatrixXd& points, const Eigen::MatrixXd& bandwidth);
    static KdeModel fit(const Eigen::MatrixXd& points);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(bandwidth_.rows()); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(whitened_.rows()); }
    const Eigen::MatrixXd& bandwidth() const noexcept { return bandwidth_; }
    const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
    double log_norm() const noexcept { return log_norm_; }
    const Eigen::MatrixXd& points() const noexcept { return points_; }

    // One value per query row.
    Eigen::VectorXd logpdf(const Eigen::MatrixXd& query) const;

  private:
    Eigen::MatrixXd points_;
    Eigen::MatrixXd bandwidth_;
    Eigen::MatrixXd chol_;
    Eigen::RowVectorXd center_;
    Eigen::MatrixXd whitened_;       // M x d
    Eigen::VectorXd whitened_sq_;    // squared row norms
    double log_norm_ = 0.0;          // d/2 log(2 pi) + log|L|
};

/// Conditional density of a child given its parents: joint KDE over
/// (child, parents) divided by a separately fitted KDE over the parents.
class CkdeCpd {
  public:
    CkdeCpd() = default;
    // `joint` holds the child in column 0 followed by the parents.
    CkdeCpd(std::string child, std::vector<std::string> parents, const Eigen::MatrixXd& joint);
    // Explicit bandwidths; `marginal_bandwidth` is ignored without parents.
    CkdeCpd(std::string child, std::vector<std::string> parents, const Eigen::MatrixXd& joint,
            const Eigen::MatrixXd& joint_bandwidth, const Eigen::MatrixXd& marginal_bandwidth);

    static CkdeCpd fit(const Dataset& data, const std::string& child, const std::vector<std::string>& parents);
    static CkdeCpd fit(const Dataset& data, const std::string& child, const std::vector<std::string>& parents,
                       std::span<const std::size_t> rows);

    const std::string& child() const noexcept { return child_; }
    const std::vector<std::string>& parents() const noexcept { return parents_; }
    const KdeModel& joint() const noexcept { return joint_; }
    const KdeModel* marginal() const noexcept { return parents_.empty() ? nullptr : &marginal_; }

    // Query block in the same column layout as the fit.
    Eigen::VectorXd logpdf(const Eigen::MatrixXd& joint_query) const;
    Eigen::VectorXd logpdf(const Dataset& data) const;
    Eigen::VectorXd logpdf(const Dataset& data, std::span<const std::size_t> rows) const;

  private:
    std::string child_;
    std::vector<std::string> parents_;
    KdeModel joint_;
    KdeModel marginal_;
};

// Column indices of (child, parents...) in `data`.
std::vector<int> family_columns(const Dataset& data, const std::string& child,
                                const std::vector<std::string>& parents);

struct KdeBayesianNetwork {
    Dag dag;
    std::vector<CkdeCpd> cpds;  // indexed like dag nodes
};

// Per-node log-likelihood sums.
Eigen::VectorXd node_logliks(const KdeBayesianNetwork& bn, const Dataset& data);
double network_loglik(const KdeBayesianNetwork& bn, const Dataset& data);

}  // namespace kdetl
