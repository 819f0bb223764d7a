#include "kdetl/rcot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

constexpr Eigen::Index kMedianRows = 500;
constexpr double kRidge = 1e-10;

// Column-wise (x - mean) / sd with the n-1 denominator; zero-variance
// columns become zero.
Eigen::MatrixXd standardize(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m.rowwise() - m.colwise().mean();
    const double denom = static_cast<double>(std::max<Eigen::Index>(m.rows() - 1, 1));
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const double sd = std::sqrt(out.col(c).squaredNorm() / denom);
        if (sd > 0.0) {
            out.col(c) /= sd;
        } else {
            out.col(c).setZero();
        }
    }
    return out;
}

double column_sd(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

Eigen::MatrixXd cross_cov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
    const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
    return ac.transpose() * bc / static_cast<double>(a.rows() - 1);
}

// Covariance of all pairwise elementwise products res_x[:, i] * res_y[:, j].
Eigen::VectorXd product_eigenvalues(const Eigen::MatrixXd& rx, const Eigen::MatrixXd& ry) {
    const Eigen::Index r = rx.rows();
    Eigen::MatrixXd prod(r, rx.cols() * ry.cols());
    for (Eigen::Index j = 0; j < ry.cols(); ++j) {
        for (Eigen::Index i = 0; i < rx.cols(); ++i) {
            prod.col(j * rx.cols() + i) = rx.col(i).cwiseProduct(ry.col(j));
        }
    }
    const Eigen::MatrixXd cov = prod.transpose() * prod / static_cast<double>(r);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    std::vector<double> kept;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        if (eig.eigenvalues()(i) > 0.0) kept.push_back(eig.eigenvalues()(i));
    }
    return Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
}

double clip01(double p) {
    if (!std::isfinite(p)) return 1.0;
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double median_heuristic(const Eigen::MatrixXd& block) {
    const Eigen::Index n = std::min(block.rows(), kMedianRows);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((block.row(i) - block.row(j)).norm());
    }
    if (dist.empty()) return 1.0;
    const std::size_t mid = dist.size() / 2;
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid), dist.end());
    double med = dist[mid];
    if (dist.size() % 2 == 0) {
        const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    return med > 0.0 ? med : 1.0;
}

Eigen::MatrixXd fourier_features(const Eigen::MatrixXd& data, const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                                 double sigma) {
    if (!(sigma > 0.0)) throw Error("invalid-bandwidth", "fourier feature sigma must be positive");
    if (w.rows() != data.cols() || w.cols() != b.size()) {
        throw Error("dimension-mismatch", "fourier weights do not match data");
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(b.size()));
    Eigen::MatrixXd arg = (data * w) / sigma;
    arg.rowwise() += b.transpose();
    return scale * arg.array().cos().matrix();
}

Eigen::MatrixXd fourier_features(const Eigen::MatrixXd& data, std::size_t num, double sigma, Seed seed) {
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * std::numbers::pi);
    const auto k = static_cast<Eigen::Index>(num);
    Eigen::MatrixXd w(data.cols(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
        for (Eigen::Index r = 0; r < data.cols(); ++r) w(r, c) = normal(rng);
    }
    Eigen::VectorXd b(k);
    for (Eigen::Index c = 0; c < k; ++c) b(c) = uniform(rng);
    return fourier_features(data, w, b, sigma);
}

double weighted_chisq_sf(const Eigen::VectorXd& weights, double statistic, NullApprox approx) {
    if (weights.size() == 0) return 1.0;
    if (approx == NullApprox::hbe) {
        const double k1 = weights.sum();
        const double k2 = 2.0 * weights.array().square().sum();
        const double k3 = 8.0 * weights.array().cube().sum();
        const double nu = 8.0 * k2 * k2 * k2 / (k3 * k3);
        const double xs = std::sqrt(2.0 * nu / k2) * (statistic - k1) + nu;
        if (!(xs > 0.0)) return 1.0;
        return clip01(boost::math::gamma_q(nu / 2.0, xs / 2.0));
    }
    const double w = weights.sum();
    const double u = weights.array().square().sum() / (w * w);
    if (!(statistic > 0.0)) return 1.0;
    return clip01(boost::math::gamma_q(0.5 / u, statistic / (2.0 * u * w)));
}

CiResult rcot(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const RcotConfig& cfg) {
    const Eigen::Index r = x.size();
    if (y.size() != r || (z.cols() > 0 && z.rows() != r)) {
        throw Error("dimension-mismatch", "RCoT inputs have different row counts");
    }
    if (r < 3 || column_sd(x) == 0.0 || column_sd(y) == 0.0) return {};

    const Eigen::MatrixXd xs = standardize(x);
    const Eigen::MatrixXd ys = standardize(y);
    const Eigen::MatrixXd fx = standardize(
        fourier_features(xs, cfg.num_features_xy, median_heuristic(xs), cfg.seed.derive(std::uint64_t{1})));
    const Eigen::MatrixXd fy = standardize(
        fourier_features(ys, cfg.num_features_xy, median_heuristic(ys), cfg.seed.derive(std::uint64_t{2})));

    std::vector<Eigen::Index> live;
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        if (column_sd(z.col(c)) > 0.0) live.push_back(c);
    }

    const double rd = static_cast<double>(r);
    CiResult out;
    if (live.empty()) {
        const Eigen::MatrixXd cxy = cross_cov(fx, fy);
        out.statistic = rd * cxy.squaredNorm();
        const Eigen::MatrixXd rx = fx.rowwise() - fx.colwise().mean();
        const Eigen::MatrixXd ry = fy.rowwise() - fy.colwise().mean();
        out.p_value = weighted_chisq_sf(product_eigenvalues(rx, ry), out.statistic, cfg.null_approx);
        return out;
    }

    Eigen::MatrixXd zl(r, static_cast<Eigen::Index>(live.size()));
    for (std::size_t i = 0; i < live.size(); ++i) zl.col(static_cast<Eigen::Index>(i)) = z.col(live[i]);
    const Eigen::MatrixXd zs = standardize(zl);
    const Eigen::MatrixXd fz = standardize(
        fourier_features(zs, cfg.num_features_z, median_heuristic(zs), cfg.seed.derive(std::uint64_t{3})));

    const Eigen::MatrixXd cxy = cross_cov(fx, fy);
    Eigen::MatrixXd czz = cross_cov(fz, fz);
    czz.diagonal().array() += kRidge;
    const Eigen::MatrixXd i_czz = czz.ldlt().solve(Eigen::MatrixXd::Identity(czz.rows(), czz.cols()));
    const Eigen::MatrixXd cxz = cross_cov(fx, fz);
    const Eigen::MatrixXd czy = cross_cov(fz, fy);

    const Eigen::MatrixXd z_i_czz = fz * i_czz;
    const Eigen::MatrixXd rx = fx - z_i_czz * cxz.transpose();
    const Eigen::MatrixXd ry = fy - z_i_czz * czy;
    const Eigen::MatrixXd cxy_z = cxy - cxz * i_czz * czy;
    out.statistic = rd * cxy_z.squaredNorm();
    out.p_value = weighted_chisq_sf(product_eigenvalues(rx, ry), out.statistic, cfg.null_approx);
    return out;
}

Seed query_seed(Seed run, const std::string& x, const std::string& y, std::vector<std::string> z) {
    std::sort(z.begin(), z.end());
    const bool swap = y < x;
    std::string key = (swap ? y : x) + '\x1f' + (swap ? x : y) + '\x1e';
    for (const auto& v : z) key += v + '\x1f';
    return run.derive(fnv1a(key));
}

RcotTest::RcotTest(const Dataset& data, RcotConfig cfg) : RcotTest(data, NodeSet(data.names()), cfg) {}

RcotTest::RcotTest(const Dataset& data, const NodeSet& nodes, RcotConfig cfg)
    : data_(data), nodes_(nodes), cfg_(cfg) {
    columns_.reserve(nodes_.size());
    for (const auto& n : nodes_.names()) columns_.push_back(static_cast<int>(data_.index_of(n)));
}

double RcotTest::pvalue(int x, int y, std::span<const int> z) { return test(x, y, z).p_value; }

CiResult RcotTest::test(int x, int y, std::span<const int> z) {
    // Canonical orientation: the name-smaller variable plays x.
    if (nodes_.name_less(y, x)) std::swap(x, y);
    std::vector<int> zs(z.begin(), z.end());
    std::sort(zs.begin(), zs.end(), [&](int a, int b) { return nodes_.name_less(a, b); });
    auto key = std::make_tuple(x, y, zs);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::vector<std::string> znames;
    std::vector<int> zcols;
    for (int v : zs) {
        znames.push_back(nodes_.name(v));
        zcols.push_back(columns_[static_cast<std::size_t>(v)]);
    }
    RcotConfig cfg = cfg_;
    cfg.seed = query_seed(cfg_.seed, nodes_.name(x), nodes_.name(y), znames);
    const Eigen::VectorXd xv = data_.column(static_cast<std::size_t>(columns_[static_cast<std::size_t>(x)]));
    const Eigen::VectorXd yv = data_.column(static_cast<std::size_t>(columns_[static_cast<std::size_t>(y)]));
    const Eigen::MatrixXd zv = data_.gather(zcols);
    const CiResult res = rcot(xv, yv, zv, cfg);
    std::lock_guard lock(mutex_);
    cache_.emplace(std::move(key), res);
    return res;
}

}  // namespace kdetl
