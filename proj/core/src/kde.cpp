#include "kdetl/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

constexpr Eigen::Index kQueryChunk = 256;

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
}

bool near_singular(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double hi = eig.eigenvalues().maxCoeff();
    const double lo = eig.eigenvalues().minCoeff();
    if (!(hi > 0.0)) return true;
    if (lo / hi < 1e-12) return true;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    return llt.info() != Eigen::Success;
}

}  // namespace

Eigen::MatrixXd normal_reference_bandwidth(const Eigen::MatrixXd& data) {
    const auto m = data.rows();
    const auto d = data.cols();
    if (d < 1) throw Error("dimension-mismatch", "bandwidth of a zero-dimensional sample");
    if (m < d + 1) {
        throw Error("insufficient-rows", "normal reference rule needs at least d+1 = " + std::to_string(d + 1) +
                                             " rows, got " + std::to_string(m));
    }
    Eigen::MatrixXd cov = sample_covariance(data);
    if (near_singular(cov)) {
        double scale = cov.trace() / static_cast<double>(d);
        if (!(scale > 0.0)) scale = 1.0;
        cov.diagonal().array() += 1e-8 * scale;
        if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success) {
            throw Error("singular-covariance", "covariance is singular after regularization");
        }
    }
    const double dd = static_cast<double>(d);
    const double factor = std::pow(4.0 / (dd + 2.0), 2.0 / (dd + 4.0)) *
                          std::pow(static_cast<double>(m), -2.0 / (dd + 4.0));
    return factor * cov;
}

KdeModel::KdeModel(const Eigen::MatrixXd& points, const Eigen::MatrixXd& bandwidth)
    : points_(points), bandwidth_(bandwidth) {
    if (points.rows() < 1) throw Error("insufficient-rows", "KDE needs at least one training point");
    if (bandwidth.rows() != bandwidth.cols() || bandwidth.rows() != points.cols()) {
        throw Error("dimension-mismatch", "bandwidth shape does not match training points");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(bandwidth_);
    if (llt.info() != Eigen::Success) throw Error("singular-covariance", "bandwidth is not positive definite");
    chol_ = llt.matrixL();
    center_ = points.colwise().mean();
    // Rows of whitened = L^{-1} (x - center).
    whitened_ = chol_.triangularView<Eigen::Lower>()
                    .solve((points.rowwise() - center_).transpose())
                    .transpose();
    whitened_sq_ = whitened_.rowwise().squaredNorm();
    const double d = static_cast<double>(points.cols());
    log_norm_ = 0.5 * d * std::log(2.0 * std::numbers::pi) + chol_.diagonal().array().log().sum();
}

KdeModel KdeModel::fit(const Eigen::MatrixXd& points) {
    return KdeModel(points, normal_reference_bandwidth(points));
}

Eigen::VectorXd KdeModel::logpdf(const Eigen::MatrixXd& query) const {
    if (static_cast<std::size_t>(query.cols()) != dim()) {
        throw Error("dimension-mismatch", "query has " + std::to_string(query.cols()) + " columns, model has " +
                                              std::to_string(dim()));
    }
    const Eigen::Index q = query.rows();
    const double log_m = std::log(static_cast<double>(size()));
    Eigen::VectorXd out(q);
    for (Eigen::Index start = 0; start < q; start += kQueryChunk) {
        const Eigen::Index len = std::min(kQueryChunk, q - start);
        const Eigen::MatrixXd w = chol_.triangularView<Eigen::Lower>()
                                      .solve((query.middleRows(start, len).rowwise() - center_).transpose())
                                      .transpose();
        const Eigen::VectorXd wsq = w.rowwise().squaredNorm();
        // exponent(i, j) = -0.5 * |w_i - t_j|^2
        Eigen::MatrixXd e = w * whitened_.transpose();
        for (Eigen::Index i = 0; i < len; ++i) {
            auto row = e.row(i);
            row = (-0.5 * ((wsq(i) + whitened_sq_.transpose().array() - 2.0 * row.array()).max(0.0))).matrix();
            const double top = row.maxCoeff();
            out(start + i) = top + std::log((row.array() - top).exp().sum()) - log_m - log_norm_;
        }
    }
    return out;
}

CkdeCpd::CkdeCpd(std::string child, std::vector<std::string> parents, const Eigen::MatrixXd& joint)
    : child_(std::move(child)), parents_(std::move(parents)) {
    if (static_cast<std::size_t>(joint.cols()) != parents_.size() + 1) {
        throw Error("dimension-mismatch", "CKDE training block has the wrong number of columns");
    }
    joint_ = KdeModel::fit(joint);
    if (!parents_.empty()) marginal_ = KdeModel::fit(joint.rightCols(joint.cols() - 1));
}

CkdeCpd::CkdeCpd(std::string child, std::vector<std::string> parents, const Eigen::MatrixXd& joint,
                 const Eigen::MatrixXd& joint_bandwidth, const Eigen::MatrixXd& marginal_bandwidth)
    : child_(std::move(child)), parents_(std::move(parents)) {
    if (static_cast<std::size_t>(joint.cols()) != parents_.size() + 1) {
        throw Error("dimension-mismatch", "CKDE training block has the wrong number of columns");
    }
    joint_ = KdeModel(joint, joint_bandwidth);
    if (!parents_.empty()) marginal_ = KdeModel(joint.rightCols(joint.cols() - 1), marginal_bandwidth);
}

std::vector<int> family_columns(const Dataset& data, const std::string& child,
                                const std::vector<std::string>& parents) {
    std::vector<int> cols;
    cols.reserve(parents.size() + 1);
    cols.push_back(static_cast<int>(data.index_of(child)));
    for (const auto& p : parents) cols.push_back(static_cast<int>(data.index_of(p)));
    return cols;
}

CkdeCpd CkdeCpd::fit(const Dataset& data, const std::string& child, const std::vector<std::string>& parents) {
    return CkdeCpd(child, parents, data.gather(family_columns(data, child, parents)));
}

CkdeCpd CkdeCpd::fit(const Dataset& data, const std::string& child, const std::vector<std::string>& parents,
                     std::span<const std::size_t> rows) {
    return CkdeCpd(child, parents, data.gather(rows, family_columns(data, child, parents)));
}

Eigen::VectorXd CkdeCpd::logpdf(const Eigen::MatrixXd& joint_query) const {
    Eigen::VectorXd out = joint_.logpdf(joint_query);
    if (!parents_.empty()) out -= marginal_.logpdf(joint_query.rightCols(joint_query.cols() - 1));
    return out;
}

Eigen::VectorXd CkdeCpd::logpdf(const Dataset& data) const {
    return logpdf(data.gather(family_columns(data, child_, parents_)));
}

Eigen::VectorXd CkdeCpd::logpdf(const Dataset& data, std::span<const std::size_t> rows) const {
    return logpdf(data.gather(rows, family_columns(data, child_, parents_)));
}

Eigen::VectorXd node_logliks(const KdeBayesianNetwork& bn, const Dataset& data) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(bn.cpds.size()));
    for (std::size_t v = 0; v < bn.cpds.size(); ++v) out(static_cast<Eigen::Index>(v)) = bn.cpds[v].logpdf(data).sum();
    return out;
}

double network_loglik(const KdeBayesianNetwork& bn, const Dataset& data) { return node_logliks(bn, data).sum(); }

}  // namespace kdetl
